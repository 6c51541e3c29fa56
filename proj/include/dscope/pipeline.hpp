#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dscope/dataset.hpp"
#include "dscope/fixture_store.hpp"
#include "dscope/likert.hpp"
#include "dscope/report.hpp"
#include "dscope/run_config.hpp"
#include "dscope/tree_sampler.hpp"

namespace dscope {

/// Builds the logit source selected by the config (loading the toy table or
/// fixture file as needed).
std::unique_ptr<LogitSource> make_source(const RunConfig& config);

/// One next-token distribution for a rendered prompt, through whichever source
/// is configured. Raw-logit sources are softmaxed at temperature 1 so entries
/// are always the model's probabilities.
TokenDistribution fetch_distribution(const LogitSource& source, const std::string& prompt);

struct ExampleScore {
    std::string metric;
    LikertResult result;
};

struct ScoringOutput {
    std::vector<ExampleScore> results;  // dataset x metric x ordering, in run order
    CorrelationReport report;
    /// Distributions fetched during the run, for exact replay (empty when
    /// recording is disabled or the source is already a replay).
    std::shared_ptr<FixtureStore> recorded;
    std::vector<std::string> failures;  // "id: reason", dataset order
};

/// Full scoring run: for every example x metric x ordering, render the
/// prompt, fetch the distribution, extract label probabilities and compute
/// greedy and expected scores; then per-metric Pearson correlations for both
/// score streams, the positional-average variant when >= 2 orderings are
/// configured, and bootstrap significance of each greedy/expected gap.
/// Failing examples are excluded and counted; the run aborts when more than
/// abort_fail_fraction of them fail.
ScoringOutput run_scoring(const RunConfig& config, const std::vector<AnnotatedExample>& dataset,
                          const LogitSource& source, const McqPromptSpec& prompt_spec);

/// Convenience overload that builds the source and loads prompt templates
/// from the config paths.
ScoringOutput run_scoring(const RunConfig& config, const std::vector<AnnotatedExample>& dataset);

/// JSON-lines per-example result stream:
///   {"id", "metric", "ordering", "labels": {...probs}, "greedy", "expected", "T"}
std::string results_to_jsonl(const std::vector<ExampleScore>& results);

struct TreeRun {
    TreeSampleResult result;
    std::string table;  // report_tree output plus a budget note when relevant
};

/// Runs the tree sampler over the configured source and renders the
/// probability table at the configured min probability.
TreeRun run_tree(const RunConfig& config, const std::vector<Token>& prompt_tokens);

/// Built-in fallback templates used when the config paths are empty.
McqPromptSpec default_prompt_spec();

}  // namespace dscope
