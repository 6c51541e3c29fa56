#pragma once

#include <span>
#include <string>

#include "dscope/distributions.hpp"

namespace dscope {

struct SourceCapabilities {
    /// Largest number of candidates one call can return (vocabulary size for
    /// full-vocabulary sources, K for top-K sources).
    int max_candidates = 0;
    /// True when every call covers the entire vocabulary, so probability mass
    /// accounting over the returned candidates is exact.
    bool full_vocabulary = false;
};

/// Uniform contract for next-token log-probability providers: the toy
/// table-driven LM, the recorded-fixture replay source and the remote
/// endpoint client. Implementations must be safe for concurrent callers.
class LogitSource {
public:
    virtual ~LogitSource() = default;

    virtual SourceCapabilities capabilities() const = 0;

    /// Next-token logits (or logprobs-as-logits) after the given sequence.
    /// The toy LM interprets the sequence as vocabulary tokens; prompt-keyed
    /// sources concatenate it into the prompt text.
    virtual LogitVector next_token_logits(std::span<const Token> tokens) const = 0;

    /// True when next_token_logits returns log-probabilities (replay, remote)
    /// rather than raw logits (toy LM).
    virtual bool returns_logprobs() const = 0;

    virtual std::string name() const = 0;
};

/// Joins a token sequence into prompt text (plain concatenation; token
/// strings are opaque and carry their own spacing).
std::string concat_tokens(std::span<const Token> tokens);

}  // namespace dscope
