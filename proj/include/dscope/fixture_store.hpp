#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dscope/logit_source.hpp"

namespace dscope {

struct FixtureRecord {
    std::string hash_hex;  // FNV-1a 64 of the exact prompt bytes
    std::string prompt;
    std::vector<ProbEntry> candidates;  // logprob descending, <= 0
};

/// Hex-encoded FNV-1a 64 hash of the exact byte sequence of a rendered prompt.
/// Whitespace differences are significant by design.
std::string canonical_prompt_hash(std::string_view prompt);

/// Store of recorded next-token distributions keyed by canonical prompt hash.
/// Recording is idempotent for identical payloads and rejects conflicts.
/// Safe for concurrent recording; lookups are lock-free after loading.
class FixtureStore {
public:
    FixtureStore() = default;
    FixtureStore(FixtureStore&& other) noexcept
        : by_hash_(std::move(other.by_hash_)), order_(std::move(other.order_)) {}
    FixtureStore& operator=(FixtureStore&& other) noexcept {
        by_hash_ = std::move(other.by_hash_);
        order_ = std::move(other.order_);
        return *this;
    }

    static FixtureStore load(const std::filesystem::path& path);

    /// JSON-lines, one record per line:
    ///   {"hash": hex, "prompt": string, "candidates": [[token, logprob], ...]}
    void save(const std::filesystem::path& path) const;

    void record(std::string_view prompt, std::span<const ProbEntry> candidates);

    /// Record with entries already sorted by the caller.
    void record(std::string_view prompt, std::vector<ProbEntry> candidates);

    const FixtureRecord* find(std::string_view prompt) const;

    std::size_t size() const { return order_.size(); }
    bool empty() const { return order_.empty(); }

    /// Records in insertion order (file order after a load).
    std::vector<const FixtureRecord*> records() const;

private:
    mutable std::mutex mutex_;
    std::unordered_map<std::string, FixtureRecord> by_hash_;
    std::vector<std::string> order_;
};

/// Replays recorded distributions: the token sequence is concatenated into the
/// prompt and looked up by hash. Missing prompts raise MissingFixtureError.
class ReplaySource final : public LogitSource {
public:
    explicit ReplaySource(std::shared_ptr<const FixtureStore> store);

    SourceCapabilities capabilities() const override;
    LogitVector next_token_logits(std::span<const Token> tokens) const override;
    bool returns_logprobs() const override { return true; }
    std::string name() const override { return "replay"; }

    /// The recorded distribution itself (logprobs, marked incomplete since
    /// fixtures generally hold a top-K list).
    TokenDistribution fetch(std::string_view prompt) const;

private:
    std::shared_ptr<const FixtureStore> store_;
};

}  // namespace dscope
