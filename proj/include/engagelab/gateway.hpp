#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "engagelab/corpus.hpp"
#include "engagelab/llm_config.hpp"
#include "engagelab/promptkit.hpp"

namespace engagelab {

enum class TransportKind { Live, Replay, Mock };
enum class ParseStatus { Ok, Retried, Failed };

std::string_view to_string(TransportKind k) noexcept;
std::optional<TransportKind> parse_transport_kind(std::string_view s) noexcept;
std::string_view to_string(ParseStatus s) noexcept;
std::optional<ParseStatus> parse_parse_status(std::string_view s) noexcept;

struct CompletionRequest {
    std::string prompt;
    std::string digest;
    std::string record_id;
    int attempt = 0;  // 0 for the first try, then 1, 2 for parse retries
    LlmConfig config;
};

struct Completion {
    std::string text;
    TransportKind source = TransportKind::Mock;
};

/// Implementations must allow concurrent complete() calls.
class Transport {
public:
    virtual ~Transport() = default;
    virtual Completion complete(const CompletionRequest& request) = 0;
    virtual TransportKind kind() const noexcept = 0;
};

/// Scripted completions; never touches the network.
class MockTransport : public Transport {
public:
    using Script = std::function<std::string(const CompletionRequest&)>;

    explicit MockTransport(Script script) : script_(std::move(script)) {}

    Completion complete(const CompletionRequest& request) override;
    TransportKind kind() const noexcept override { return TransportKind::Mock; }
    std::size_t calls() const noexcept { return calls_.load(); }

private:
    Script script_;
    std::atomic<std::size_t> calls_{0};
};

/// Canonical completion text for a label, as a well-behaved model would answer.
std::string render_completion(IcapLabel label, std::string_view reasoning);

/// Answers with each record's gold label.
MockTransport::Script gold_script(const Dataset& d);
/// Gold label, except gold labels found in `flips` are answered with the mapped label.
MockTransport::Script flip_script(const Dataset& d, std::map<IcapLabel, IcapLabel> flips);
/// Gold label, except the listed record ids get the mapped label.
MockTransport::Script override_script(const Dataset& d, std::map<std::string, IcapLabel> overrides);
MockTransport::Script constant_script(IcapLabel label);
/// Per-record completions indexed by attempt (the last entry repeats);
/// records not listed get `fallback`.
MockTransport::Script table_script(std::map<std::string, std::vector<std::string>> completions,
                                   std::string fallback);

/// Mock script from a JSON description:
///   {"mode": "gold"} | {"mode": "constant", "label": L} |
///   {"mode": "flip", "flips": {"Constructive": "Active"}} |
///   {"mode": "override", "labels": {"id": L}} |
///   {"mode": "script", "completions": {"id": "text" | ["t1", ...]}, "fallback": "text"}
MockTransport::Script script_from_json(std::string_view json_text, const Dataset& d);

/// Digest -> completion store backed by an append-only JSONL file.
class ReplayCache {
public:
    /// Purely in-memory cache.
    ReplayCache() = default;
    /// Loads `path` when it exists; appends go to it. Corrupt lines raise IoError naming the file.
    explicit ReplayCache(std::filesystem::path path);

    std::optional<std::string> lookup(const std::string& digest) const;
    /// Adds an entry and appends it to the file; an existing digest is left untouched.
    void append(const std::string& digest, const std::string& completion, const std::string& model);

    std::size_t size() const;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::string> store_;
};

/// Serves only from the cache; a miss raises CacheMiss.
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(std::shared_ptr<const ReplayCache> cache) : cache_(std::move(cache)) {}

    Completion complete(const CompletionRequest& request) override;
    TransportKind kind() const noexcept override { return TransportKind::Replay; }

private:
    std::shared_ptr<const ReplayCache> cache_;
};

/// Wraps another transport: cache hits are served locally, misses go to the
/// inner transport once per digest (concurrent duplicates wait for it) and are appended.
class RecordingTransport : public Transport {
public:
    RecordingTransport(std::shared_ptr<ReplayCache> cache, std::shared_ptr<Transport> inner)
        : cache_(std::move(cache)), inner_(std::move(inner)) {}

    Completion complete(const CompletionRequest& request) override;
    TransportKind kind() const noexcept override { return inner_->kind(); }

private:
    std::shared_ptr<ReplayCache> cache_;
    std::shared_ptr<Transport> inner_;
    std::mutex inflight_mutex_;
    std::unordered_map<std::string, std::shared_future<std::string>> inflight_;
};

std::shared_ptr<Transport> record_mode(std::shared_ptr<ReplayCache> cache, std::shared_ptr<Transport> live);

/// OpenAI-style chat completions over HTTP(S). Transient failures (network,
/// 429, 5xx) are retried up to `attempts` times with doubling backoff.
class LiveTransport : public Transport {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    struct Options {
        std::string base_url;  // scheme://host[:port][/prefix]
        std::string api_key;
        int attempts = 3;
        std::chrono::milliseconds initial_backoff{1000};
        Sleeper sleep;  // defaults to std::this_thread::sleep_for
    };

    explicit LiveTransport(Options options);
    /// Reads ENGAGELAB_API_KEY and, when config.base_url is empty, ENGAGELAB_BASE_URL.
    static std::shared_ptr<LiveTransport> from_environment(const LlmConfig& config);

    Completion complete(const CompletionRequest& request) override;
    TransportKind kind() const noexcept override { return TransportKind::Live; }
    std::size_t requests_sent() const noexcept { return sent_.load(); }

private:
    Options options_;
    std::string host_;
    std::string path_prefix_;
    std::atomic<std::size_t> sent_{0};
};

struct AttemptLog {
    std::string prompt_digest;
    std::string completion;
    TransportKind source = TransportKind::Mock;
    bool parsed = false;

    bool operator==(const AttemptLog&) const = default;
};

struct Prediction {
    std::string record_id;
    std::optional<IcapLabel> predicted;
    std::string reasoning;
    std::string raw_completion;
    std::string prompt_digest;
    TransportKind transport = TransportKind::Mock;
    ParseStatus parse_status = ParseStatus::Failed;
    std::vector<AttemptLog> attempts;
    /// Set when the transport failed for this record.
    std::optional<std::string> error;
    std::chrono::microseconds latency{0};

    /// Ignores latency.
    bool operator==(const Prediction& o) const;
};

inline constexpr int kMaxParseRetries = 2;

/// Question and response pass through preserve_sentence_form before assembly.
/// A ParseFailure after the retries yields parse_status Failed; transport errors propagate.
Prediction classify_record(const PromptSpec& spec, const ResponseRecord& record, const LlmConfig& config,
                           Transport& transport);

/// Results in input order. At most config.max_parallel requests are in flight.
/// Transport errors are recorded per record; ConfigError aborts the batch.
std::vector<Prediction> classify_batch(const PromptSpec& spec, std::span<const ResponseRecord> records,
                                       const LlmConfig& config, Transport& transport);

}  // namespace engagelab
