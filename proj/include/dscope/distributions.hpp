#pragma once

#include <string>
#include <vector>

#include "dscope/errors.hpp"

namespace dscope {

/// Token strings are opaque; this library never tokenizes text itself.
using Token = std::string;

struct LogitEntry {
    Token token;
    double logit = 0.0;
};

/// Raw next-token logits for one position. Tokens must be unique, logits finite.
struct LogitVector {
    std::vector<LogitEntry> entries;

    /// Throws InvalidInputError when empty, non-finite or with duplicate tokens.
    void validate() const;
};

struct ProbEntry {
    Token token;
    double logprob = 0.0;  // natural log, <= 0 up to rounding
};

/// Next-token probabilities at some temperature. Entries are sorted by logprob
/// descending, ties by token ascending. `complete` marks full-support
/// distributions whose probabilities sum to 1 (within 1e-9); restricted-support
/// distributions (e.g. after top-p) carry less mass and are marked incomplete.
struct TokenDistribution {
    std::vector<ProbEntry> entries;
    double temperature = 1.0;
    bool complete = true;

    double prob(std::size_t i) const;
    double total_mass() const;
    const ProbEntry* find(const Token& token) const;

    /// Checks ordering and, for complete distributions, the unit-mass invariant.
    void validate() const;
};

/// Temperature-scaled softmax: p_i = exp(l_i/T) / sum_j exp(l_j/T), computed
/// with max-logit subtraction. Result is complete and sorted.
TokenDistribution softmax_with_temperature(const LogitVector& logits, double temperature);

/// Smallest prefix of the sorted entries whose cumulative probability reaches
/// p_hat. Original logprobs are retained; the result is NOT renormalized.
TokenDistribution top_p_candidates(const TokenDistribution& dist, double p_hat);

/// Softmax at `temperature` restricted to `support`, treating the entries'
/// logprobs as logits. Support tokens absent from the distribution get
/// probability zero; at least one must be present. Result sums to 1.
TokenDistribution renormalize_over(const TokenDistribution& dist,
                                   const std::vector<Token>& support,
                                   double temperature);

namespace detail {
/// Stable softmax over logits that may contain -inf (but at least one finite
/// value). Returns logprobs aligned with the input.
std::vector<double> stable_log_softmax(const std::vector<double>& logits, double temperature);
}  // namespace detail

}  // namespace dscope
