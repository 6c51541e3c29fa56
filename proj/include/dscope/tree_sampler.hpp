#pragma once

#include <limits>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dscope/logit_source.hpp"

namespace dscope {

struct TreeConfig {
    double top_p = 0.9;
    double temperature = 1.0;
    /// Minimum cumulative log-likelihood a queued completion may have (alpha).
    double min_cum_logprob = -std::numeric_limits<double>::infinity();
    std::vector<Token> stop_tokens;
    int max_steps = 1000;
    /// Hard cap on extension length; sequences that reach it without a stop
    /// token are classed incomplete-budget. Guarantees termination on sources
    /// with unreachable stop tokens.
    int max_length = 64;
    /// When true, kept candidates are renormalized within the nucleus, the way
    /// samplers that renormalize report probabilities. Default keeps the
    /// full-softmax logprobs so completion probabilities stay interpretable as
    /// model probabilities at the configured temperature.
    bool nucleus_renormalize = false;
    /// Record the cumulative logprob of every queue pop.
    bool record_pop_trace = false;

    void validate() const;
};

enum class SequenceStatus { complete, incomplete_alpha, incomplete_budget };

std::string to_string(SequenceStatus status);

/// A completion path. Tokens cover the extension only (the prompt enters with
/// cumulative logprob 0); cum_logprob is the sum of per-step logprobs.
struct ScoredSequence {
    std::vector<Token> tokens;
    double cum_logprob = 0.0;
    SequenceStatus status = SequenceStatus::complete;

    std::string text() const;  // plain concatenation of token strings
};

struct MassAccount {
    double complete = 0.0;
    double incomplete = 0.0;
    double frontier = 0.0;
    double dropped_by_top_p = 0.0;

    double total() const { return complete + incomplete + frontier + dropped_by_top_p; }
};

struct TreeSampleResult {
    std::vector<ScoredSequence> complete;    // cum_logprob descending
    std::vector<ScoredSequence> incomplete;  // alpha- and budget-terminated
    std::vector<ScoredSequence> frontier;    // queue remnant at halt
    int steps_used = 0;
    MassAccount mass;
    std::vector<double> pop_trace;  // filled when record_pop_trace is set
};

/// Best-first enumeration of the probable completion space: pop the
/// maximum-cumulative-logprob sequence, expand it through a temperature-scaled
/// softmax and top-p candidate selection, classify children on stop tokens,
/// the alpha floor and the length cap, and halt when the queue is empty or
/// max_steps source evaluations were spent. Equal priorities pop in insertion
/// order.
TreeSampleResult tree_sample(const LogitSource& source, std::span<const Token> prompt,
                             const TreeConfig& config);

/// Source failure mid-run; carries the partial result accumulated so far.
class TreeSampleError : public Error {
public:
    TreeSampleError(const std::string& what, TreeSampleResult partial)
        : Error(what), partial_(std::move(partial)) {}
    const TreeSampleResult& partial() const { return partial_; }

private:
    TreeSampleResult partial_;
};

/// Pop-order trace of an instrumented run; non-increasing by construction.
/// Throws InvalidInputError when the run was not instrumented.
const std::vector<double>& pop_order_trace(const TreeSampleResult& result);

/// Probability/text table of complete sequences with exp(cum_logprob) >=
/// min_probability, probabilities to 3 significant figures.
std::string report_tree(const TreeSampleResult& result, double min_probability);

nlohmann::json tree_result_to_json(const TreeSampleResult& result, const TreeConfig& config);

}  // namespace dscope
