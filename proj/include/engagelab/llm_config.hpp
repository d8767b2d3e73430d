#pragma once

#include <chrono>
#include <string>

namespace engagelab {

/// Decoding and client settings for one chat-completion model.
struct LlmConfig {
    std::string model_name = "gpt-4";
    double temperature = 0.0;
    double top_p = 0.01;
    int max_output_tokens = 1024;
    std::chrono::milliseconds request_timeout{60000};
    int max_parallel = 1;
    /// Falls back to $ENGAGELAB_BASE_URL when empty.
    std::string base_url;

    /// Throws ConfigError when a field is out of range.
    void validate() const;

    bool operator==(const LlmConfig&) const = default;
};

}  // namespace engagelab
