#include "dscope/remote_source.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace dscope {

using nlohmann::json;

void RemoteConfig::validate() const {
    if (base_url.empty()) throw InvalidInputError("remote base_url is empty");
    if (top_logprobs < 1) throw InvalidInputError("top_logprobs must be >= 1");
    if (!(timeout_seconds > 0)) throw InvalidInputError("timeout must be positive");
    if (max_attempts < 1) throw InvalidInputError("max_attempts must be >= 1");
    if (max_in_flight < 1 || max_in_flight > 256)
        throw InvalidInputError("max_in_flight must be in [1, 256]");
}

RemoteSource::RemoteSource(RemoteConfig config)
    : config_(std::move(config)), in_flight_(config_.max_in_flight) {
    config_.validate();
}

RemoteSource::~RemoteSource() = default;

SourceCapabilities RemoteSource::capabilities() const {
    return {config_.top_logprobs, false};
}

TokenDistribution parse_completions_logprobs(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponseError("response is not valid JSON: " + std::string(e.what()),
                                     body);
    }
    try {
        const json& choices = doc.at("choices");
        if (!choices.is_array() || choices.empty())
            throw MalformedResponseError("response has no choices", body);
        const json& logprobs = choices[0].at("logprobs");
        if (logprobs.is_null())
            throw MalformedResponseError("response is missing the logprobs field", body);
        const json& tops = logprobs.at("top_logprobs");
        if (!tops.is_array() || tops.empty())
            throw MalformedResponseError("top_logprobs is empty", body);
        const json& first = tops[0];
        if (!first.is_object() || first.empty())
            throw MalformedResponseError("top_logprobs[0] holds no candidates", body);

        TokenDistribution dist;
        dist.temperature = 1.0;
        dist.complete = false;
        for (const auto& [token, lp] : first.items()) {
            if (!lp.is_number())
                throw MalformedResponseError("logprob for token is not a number", body);
            dist.entries.push_back({token, lp.get<double>()});
        }
        std::sort(dist.entries.begin(), dist.entries.end(),
                  [](const ProbEntry& a, const ProbEntry& b) {
                      if (a.logprob != b.logprob) return a.logprob > b.logprob;
                      return a.token < b.token;
                  });
        return dist;
    } catch (const json::exception& e) {
        throw MalformedResponseError("response is missing the logprobs field: " +
                                         std::string(e.what()),
                                     body);
    }
}

RemoteFetchResult RemoteSource::fetch_logprobs(const std::string& prompt, int k) const {
    if (k < 1) throw InvalidInputError("k must be >= 1");

    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<256>& sem;
        ~Release() { sem.release(); }
    } release{in_flight_};

    httplib::Client client(config_.base_url);
    const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    if (!config_.api_key.empty())
        client.set_default_headers({{"Authorization", "Bearer " + config_.api_key}});

    const json request{{"model", config_.model}, {"prompt", prompt}, {"max_tokens", 1},
                       {"logprobs", k},          {"temperature", 0.0}, {"echo", false}};
    const std::string request_body = request.dump();

    std::string last_failure;
    std::string last_payload;
    double backoff = config_.backoff_initial_seconds;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= config_.backoff_multiplier;
        }
        httplib::Result res = client.Post(config_.path, request_body, "application/json");
        if (!res) {
            last_failure = "transport failure: " + httplib::to_string(res.error());
            last_payload.clear();
            continue;  // transient: retry
        }
        if (res->status >= 500) {
            last_failure = "HTTP " + std::to_string(res->status);
            last_payload = res->body;
            continue;  // transient: retry
        }
        if (res->status >= 400)
            throw TransportError("HTTP " + std::to_string(res->status) + " from " +
                                     config_.base_url + config_.path,
                                 res->body);
        RemoteFetchResult out;
        out.dist = parse_completions_logprobs(res->body);
        out.attempts = attempt;
        out.raw_body = res->body;
        return out;
    }
    throw TransportError("remote call failed after " + std::to_string(config_.max_attempts) +
                             " attempts (" + last_failure + ")",
                         last_payload);
}

LogitVector RemoteSource::next_token_logits(std::span<const Token> tokens) const {
    if (tokens.empty()) throw InvalidInputError("token sequence is empty");
    const RemoteFetchResult res = fetch_logprobs(concat_tokens(tokens), config_.top_logprobs);
    LogitVector out;
    out.entries.reserve(res.dist.entries.size());
    for (const auto& e : res.dist.entries) out.entries.push_back({e.token, e.logprob});
    return out;
}

}  // namespace dscope
