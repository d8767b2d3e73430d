#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>

#include "engagelab/errors.hpp"
#include "engagelab/gateway.hpp"

namespace engagelab {

using nlohmann::json;

Completion MockTransport::complete(const CompletionRequest& request) {
    ++calls_;
    return {script_(request), TransportKind::Mock};
}

std::string render_completion(IcapLabel label, std::string_view reasoning) {
    return "Label: " + std::string(to_string(label)) + "\nChain-of-thought: " + std::string(reasoning);
}

namespace {

std::map<std::string, IcapLabel, std::less<>> gold_map(const Dataset& d) {
    std::map<std::string, IcapLabel, std::less<>> m;
    for (const auto& r : d.records())
        if (r.gold) m.emplace(r.id, *r.gold);
    return m;
}

IcapLabel gold_of(const std::map<std::string, IcapLabel, std::less<>>& m, const std::string& id) {
    auto it = m.find(id);
    if (it == m.end()) throw ConfigError("mock transport: no gold label for record '" + id + "'");
    return it->second;
}

IcapLabel label_value(const json& v) {
    auto l = v.is_string() ? parse_label_name(v.get<std::string>()) : std::nullopt;
    if (!l) throw ConfigError("mock script: bad label " + v.dump());
    return *l;
}

}  // namespace

MockTransport::Script gold_script(const Dataset& d) {
    return [gold = gold_map(d)](const CompletionRequest& r) {
        return render_completion(gold_of(gold, r.record_id), "scripted gold answer");
    };
}

MockTransport::Script flip_script(const Dataset& d, std::map<IcapLabel, IcapLabel> flips) {
    return [gold = gold_map(d), flips = std::move(flips)](const CompletionRequest& r) {
        auto g = gold_of(gold, r.record_id);
        if (auto it = flips.find(g); it != flips.end()) return render_completion(it->second, "scripted flip");
        return render_completion(g, "scripted gold answer");
    };
}

MockTransport::Script override_script(const Dataset& d, std::map<std::string, IcapLabel> overrides) {
    return [gold = gold_map(d), overrides = std::move(overrides)](const CompletionRequest& r) {
        if (auto it = overrides.find(r.record_id); it != overrides.end())
            return render_completion(it->second, "scripted override");
        return render_completion(gold_of(gold, r.record_id), "scripted gold answer");
    };
}

MockTransport::Script constant_script(IcapLabel label) {
    return [label](const CompletionRequest&) { return render_completion(label, "scripted constant"); };
}

MockTransport::Script table_script(std::map<std::string, std::vector<std::string>> completions,
                                   std::string fallback) {
    return [table = std::move(completions), fallback = std::move(fallback)](const CompletionRequest& r) {
        auto it = table.find(r.record_id);
        if (it == table.end() || it->second.empty()) return fallback;
        const auto k = std::min<std::size_t>(static_cast<std::size_t>(r.attempt), it->second.size() - 1);
        return it->second[k];
    };
}

MockTransport::Script script_from_json(std::string_view json_text, const Dataset& d) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("mock script is not valid JSON: ") + e.what());
    }
    const auto mode = j.value("mode", std::string("gold"));
    if (mode == "gold") return gold_script(d);
    if (mode == "constant") return constant_script(label_value(j.at("label")));
    if (mode == "flip") {
        std::map<IcapLabel, IcapLabel> flips;
        for (const auto& [from, to] : j.at("flips").items()) flips[label_value(from)] = label_value(to);
        return flip_script(d, std::move(flips));
    }
    if (mode == "override") {
        std::map<std::string, IcapLabel> overrides;
        for (const auto& [id, to] : j.at("labels").items()) overrides[id] = label_value(to);
        return override_script(d, std::move(overrides));
    }
    if (mode == "script") {
        std::map<std::string, std::vector<std::string>> table;
        for (const auto& [id, v] : j.at("completions").items()) {
            if (v.is_string())
                table[id] = {v.get<std::string>()};
            else
                table[id] = v.get<std::vector<std::string>>();
        }
        return table_script(std::move(table), j.value("fallback", std::string()));
    }
    throw ConfigError("mock script: unknown mode '" + mode + "'");
}

ReplayCache::ReplayCache(std::filesystem::path path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) {
        if (std::filesystem::exists(path_)) throw IoError("cannot read replay cache " + path_.string());
        return;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = json::parse(line);
            store_.emplace(j.at("digest").get<std::string>(), j.at("completion").get<std::string>());
        } catch (const json::exception& e) {
            throw IoError("corrupt replay cache " + path_.string() + " line " + std::to_string(lineno) + ": " +
                          e.what());
        }
    }
}

std::optional<std::string> ReplayCache::lookup(const std::string& digest) const {
    std::shared_lock lock(mutex_);
    auto it = store_.find(digest);
    if (it == store_.end()) return std::nullopt;
    return it->second;
}

void ReplayCache::append(const std::string& digest, const std::string& completion, const std::string& model) {
    std::unique_lock lock(mutex_);
    if (!store_.emplace(digest, completion).second) return;
    if (path_.empty()) return;

    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);

    nlohmann::ordered_json j;
    j["digest"] = digest;
    j["completion"] = completion;
    j["model"] = model;
    j["recorded_at"] = stamp;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw IoError("cannot append to replay cache " + path_.string());
}

std::size_t ReplayCache::size() const {
    std::shared_lock lock(mutex_);
    return store_.size();
}

Completion ReplayTransport::complete(const CompletionRequest& request) {
    auto hit = cache_->lookup(request.digest);
    if (!hit) throw CacheMiss("no cached completion for record '" + request.record_id + "' (digest " +
                              request.digest.substr(0, 12) + ")");
    return {std::move(*hit), TransportKind::Replay};
}

Completion RecordingTransport::complete(const CompletionRequest& request) {
    if (auto hit = cache_->lookup(request.digest)) return {std::move(*hit), TransportKind::Replay};

    std::promise<std::string> promise;
    std::shared_future<std::string> pending;
    bool owner = false;
    {
        std::lock_guard lock(inflight_mutex_);
        if (auto hit = cache_->lookup(request.digest)) return {std::move(*hit), TransportKind::Replay};
        auto it = inflight_.find(request.digest);
        if (it == inflight_.end()) {
            pending = promise.get_future().share();
            inflight_.emplace(request.digest, pending);
            owner = true;
        } else {
            pending = it->second;
        }
    }
    if (!owner) return {pending.get(), TransportKind::Replay};

    try {
        auto completion = inner_->complete(request);
        cache_->append(request.digest, completion.text, request.config.model_name);
        promise.set_value(completion.text);
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(request.digest);
        return completion;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(request.digest);
        throw;
    }
}

std::shared_ptr<Transport> record_mode(std::shared_ptr<ReplayCache> cache, std::shared_ptr<Transport> live) {
    return std::make_shared<RecordingTransport>(std::move(cache), std::move(live));
}

}  // namespace engagelab
