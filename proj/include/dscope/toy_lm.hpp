#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dscope/logit_source.hpp"

namespace dscope {

/// Deterministic table-driven n-gram language model, the desk-scale stand-in
/// for an LLM. Row lookup is by the last (order-1) tokens of the sequence
/// (fewer near the start); every row stores logits for the whole vocabulary.
///
/// File format (JSON):
///   {"vocab": ["a", ...], "order": 2, "stop": "<stop>",
///    "rows": {"[\"a\"]": [0.0, ...], ...}}
/// Row keys are the JSON array encoding of the context token list.
class ToyLm final : public LogitSource {
public:
    ToyLm(std::vector<Token> vocab, int order, Token stop_token,
          std::unordered_map<std::string, std::vector<double>> rows);

    static ToyLm from_json(const nlohmann::json& doc);
    static ToyLm load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    const std::vector<Token>& vocabulary() const { return vocab_; }
    int order() const { return order_; }
    const Token& stop_token() const { return stop_; }

    /// Context key for a token sequence: JSON array dump of the last
    /// (order-1) tokens.
    std::string context_key(std::span<const Token> tokens) const;

    SourceCapabilities capabilities() const override;
    LogitVector next_token_logits(std::span<const Token> tokens) const override;
    bool returns_logprobs() const override { return false; }
    std::string name() const override { return "toy"; }

private:
    std::vector<Token> vocab_;
    std::unordered_set<Token> vocab_set_;
    int order_;
    Token stop_;
    std::unordered_map<std::string, std::vector<double>> rows_;  // key -> logits, aligned with vocab_
};

}  // namespace dscope
