#pragma once

#include <memory>
#include <semaphore>
#include <span>
#include <string>

#include "dscope/logit_source.hpp"

namespace dscope {

struct RemoteConfig {
    std::string base_url;  // e.g. http://localhost:8000
    std::string path = "/v1/completions";
    std::string model;
    int top_logprobs = 5;  // K
    double timeout_seconds = 30.0;
    int max_attempts = 3;
    double backoff_initial_seconds = 0.5;
    double backoff_multiplier = 2.0;
    int max_in_flight = 4;
    std::string api_key;  // from the environment, never from config files

    void validate() const;
};

struct RemoteFetchResult {
    TokenDistribution dist;  // top-K only, marked incomplete
    int attempts = 0;
    std::string raw_body;
};

/// Client for an OpenAI-compatible completions endpoint. Sends
///   {"model", "prompt", "max_tokens": 1, "logprobs": K, "temperature": 0,
///    "echo": false}
/// and reads choices[0].logprobs.top_logprobs[0]. Temperature scaling is
/// applied locally by the caller, so the server is always queried at
/// temperature 0. Every call carries a deadline; transient failures (5xx,
/// transport) are retried with exponential backoff up to max_attempts. The
/// number of concurrent in-flight requests is bounded by max_in_flight.
class RemoteSource final : public LogitSource {
public:
    explicit RemoteSource(RemoteConfig config);
    ~RemoteSource() override;

    /// Top-k next-token logprobs for a prompt.
    RemoteFetchResult fetch_logprobs(const std::string& prompt, int k) const;

    SourceCapabilities capabilities() const override;
    LogitVector next_token_logits(std::span<const Token> tokens) const override;
    bool returns_logprobs() const override { return true; }
    std::string name() const override { return "remote"; }

    const RemoteConfig& config() const { return config_; }

private:
    RemoteConfig config_;
    mutable std::counting_semaphore<256> in_flight_;
};

/// Parses a completions response body into a top-K distribution.
/// Throws MalformedResponseError (with the body attached) on schema problems.
TokenDistribution parse_completions_logprobs(const std::string& body);

}  // namespace dscope
