#include "engagelab/gateway.hpp"

#include <exception>
#include <thread>

#include "engagelab/errors.hpp"
#include "engagelab/textprep.hpp"

namespace engagelab {

std::string_view to_string(TransportKind k) noexcept {
    switch (k) {
        case TransportKind::Live: return "live";
        case TransportKind::Replay: return "replay";
        case TransportKind::Mock: return "mock";
    }
    return "?";
}

std::optional<TransportKind> parse_transport_kind(std::string_view s) noexcept {
    if (s == "live") return TransportKind::Live;
    if (s == "replay") return TransportKind::Replay;
    if (s == "mock") return TransportKind::Mock;
    return std::nullopt;
}

std::string_view to_string(ParseStatus s) noexcept {
    switch (s) {
        case ParseStatus::Ok: return "ok";
        case ParseStatus::Retried: return "retried";
        case ParseStatus::Failed: return "failed";
    }
    return "?";
}

std::optional<ParseStatus> parse_parse_status(std::string_view s) noexcept {
    if (s == "ok") return ParseStatus::Ok;
    if (s == "retried") return ParseStatus::Retried;
    if (s == "failed") return ParseStatus::Failed;
    return std::nullopt;
}

bool Prediction::operator==(const Prediction& o) const {
    return record_id == o.record_id && predicted == o.predicted && reasoning == o.reasoning &&
           raw_completion == o.raw_completion && prompt_digest == o.prompt_digest && transport == o.transport &&
           parse_status == o.parse_status && attempts == o.attempts && error == o.error;
}

Prediction classify_record(const PromptSpec& spec, const ResponseRecord& record, const LlmConfig& config,
                           Transport& transport) {
    const auto start = std::chrono::steady_clock::now();
    ResponseRecord normalized = record;
    normalized.question = preserve_sentence_form(record.question);
    normalized.response = preserve_sentence_form(record.response);

    Prediction p;
    p.record_id = record.id;
    const auto prompt = assemble_prompt(spec, normalized);
    p.prompt_digest = hash_prompt(prompt, config);

    std::string retry_text;
    for (int attempt = 0; attempt <= kMaxParseRetries; ++attempt) {
        CompletionRequest req;
        if (attempt == 0) {
            req.prompt = prompt;
            req.digest = p.prompt_digest;
        } else {
            if (retry_text.empty()) retry_text = retry_prompt(spec, prompt);
            req.prompt = retry_text;
            req.digest = hash_prompt(retry_text, config);
        }
        req.record_id = record.id;
        req.attempt = attempt;
        req.config = config;

        auto completion = transport.complete(req);
        p.transport = completion.source;
        p.raw_completion = completion.text;
        AttemptLog log{req.digest, completion.text, completion.source, false};
        try {
            auto parsed = parse_label(completion.text);
            log.parsed = true;
            p.attempts.push_back(std::move(log));
            p.predicted = parsed.label;
            p.reasoning = std::move(parsed.reasoning);
            p.parse_status = attempt == 0 ? ParseStatus::Ok : ParseStatus::Retried;
            break;
        } catch (const ParseFailure&) {
            p.attempts.push_back(std::move(log));
        }
    }
    if (!p.predicted) p.parse_status = ParseStatus::Failed;
    p.latency = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start);
    return p;
}

std::vector<Prediction> classify_batch(const PromptSpec& spec, std::span<const ResponseRecord> records,
                                       const LlmConfig& config, Transport& transport) {
    config.validate();
    std::vector<Prediction> out(records.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < records.size() && !abort; i = next++) {
            try {
                out[i] = classify_record(spec, records[i], config, transport);
            } catch (const TransportError& e) {
                Prediction p;
                p.record_id = records[i].id;
                p.transport = transport.kind();
                p.parse_status = ParseStatus::Failed;
                p.error = e.what();
                out[i] = std::move(p);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                abort = true;
            }
        }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel), records.size());
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (fatal) std::rethrow_exception(fatal);
    return out;
}

}  // namespace engagelab
