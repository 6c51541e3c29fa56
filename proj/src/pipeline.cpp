#include "dscope/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "dscope/rng.hpp"
#include "dscope/stats.hpp"
#include "dscope/toy_lm.hpp"

namespace dscope {

using nlohmann::json;

std::unique_ptr<LogitSource> make_source(const RunConfig& config) {
    config.validate();
    if (config.source == "toy")
        return std::make_unique<ToyLm>(ToyLm::load(config.toy_table));
    if (config.source == "replay") {
        auto store = std::make_shared<FixtureStore>(FixtureStore::load(config.fixtures));
        return std::make_unique<ReplaySource>(std::move(store));
    }
    RemoteConfig remote = config.remote;
    if (const char* key = std::getenv("DSCOPE_API_KEY")) remote.api_key = key;
    return std::make_unique<RemoteSource>(std::move(remote));
}

TokenDistribution fetch_distribution(const LogitSource& source, const std::string& prompt) {
    const std::vector<Token> tokens{prompt};
    const LogitVector logits = source.next_token_logits(tokens);
    if (!source.returns_logprobs()) return softmax_with_temperature(logits, 1.0);

    TokenDistribution dist;
    dist.temperature = 1.0;
    dist.complete = false;
    dist.entries.reserve(logits.entries.size());
    for (const auto& e : logits.entries) dist.entries.push_back({e.token, e.logit});
    std::sort(dist.entries.begin(), dist.entries.end(),
              [](const ProbEntry& a, const ProbEntry& b) {
                  if (a.logprob != b.logprob) return a.logprob > b.logprob;
                  return a.token < b.token;
              });
    return dist;
}

namespace {

LabelVariants variants_for(const RunConfig& config, const McqPromptSpec& spec) {
    LabelVariants variants = default_label_variants(spec.labels);
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        auto it = config.label_variants.find(spec.labels[i]);
        if (it != config.label_variants.end()) variants[i] = it->second;
    }
    return variants;
}

struct ExampleOutcome {
    bool failed = false;
    std::string error;
    std::vector<ExampleScore> scores;  // metric-major, ordering-minor
};

CorrelationCell corr_cell(const Eigen::VectorXd& human, const Eigen::VectorXd& scores) {
    try {
        return {pearson(human, scores), false};
    } catch (const DegenerateSeriesError&) {
        return {0.0, true};
    }
}

}  // namespace

ScoringOutput run_scoring(const RunConfig& config, const std::vector<AnnotatedExample>& dataset,
                          const LogitSource& source, const McqPromptSpec& prompt_spec) {
    config.validate();
    if (dataset.empty()) throw InvalidInputError("dataset is empty");
    for (const auto& ex : dataset) ex.validate();

    const LabelVariants variants = variants_for(config, prompt_spec);
    auto recorder = (config.record_fixtures && source.name() != "replay")
                        ? std::make_shared<FixtureStore>()
                        : nullptr;

    std::vector<ExampleOutcome> outcomes(dataset.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < dataset.size(); i = next.fetch_add(1)) {
            const AnnotatedExample& ex = dataset[i];
            ExampleOutcome& outcome = outcomes[i];
            const std::uint64_t example_seed = derive_seed(config.seed, ex.id);
            try {
                for (const auto& metric : kMetricNames) {
                    for (ChoiceOrdering ordering : config.orderings) {
                        const RenderedPrompt rendered =
                            render_prompt(prompt_spec, ex.article, ex.summary, metric,
                                          ordering, example_seed);
                        const TokenDistribution dist =
                            fetch_distribution(source, rendered.text);
                        if (recorder) recorder->record(rendered.text, dist.entries);
                        const auto probs = extract_label_probs(dist, prompt_spec.labels,
                                                               variants, config.temperature);
                        LikertResult result;
                        result.example_id = ex.id;
                        result.ordering = ordering;
                        result.labels = prompt_spec.labels;
                        result.label_probs = probs;
                        result.score_map = rendered.score_map;
                        result.greedy = greedy_score(probs, rendered.score_map);
                        result.expected = expected_score(probs, rendered.score_map);
                        result.temperature = config.temperature;
                        outcome.scores.push_back({metric, std::move(result)});
                    }
                }
            } catch (const std::exception& e) {
                outcome.failed = true;
                outcome.error = e.what();
                outcome.scores.clear();
            }
        }
    };
    if (config.workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        const int n_workers = std::min<int>(config.workers, static_cast<int>(dataset.size()));
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    ScoringOutput output;
    output.recorded = recorder;
    std::vector<std::size_t> scored_indices;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].failed) {
            output.failures.push_back(dataset[i].id + ": " + outcomes[i].error);
        } else {
            scored_indices.push_back(i);
            for (auto& score : outcomes[i].scores) output.results.push_back(std::move(score));
        }
    }

    const std::size_t failed = output.failures.size();
    if (!dataset.empty() &&
        static_cast<double>(failed) / static_cast<double>(dataset.size()) >
            config.abort_fail_fraction) {
        std::string detail;
        for (std::size_t i = 0; i < std::min<std::size_t>(failed, 5); ++i)
            detail += "\n  " + output.failures[i];
        throw Error(std::to_string(failed) + " of " + std::to_string(dataset.size()) +
                    " examples failed (above the abort threshold)" + detail);
    }

    // Index scored results: per (metric, ordering) slot, one score per scored example.
    const std::size_t n_orderings = config.orderings.size();
    const std::size_t n = scored_indices.size();
    CorrelationReport& report = output.report;
    report.examples_in = static_cast<int>(dataset.size());
    report.examples_scored = static_cast<int>(n);
    report.examples_failed = static_cast<int>(failed);
    report.shuffles = config.shuffles;
    report.seed = config.seed;
    report.temperature = config.temperature;
    report.source = source.name();

    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        const std::string& metric = kMetricNames[m];
        Eigen::VectorXd human(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
            human[static_cast<Eigen::Index>(j)] =
                dataset[scored_indices[j]].human.at(metric);

        MetricRow row;
        row.metric = metric;

        auto result_at = [&](std::size_t j, std::size_t ordering_idx) -> const LikertResult& {
            const auto& scores = outcomes[scored_indices[j]].scores;
            return scores[m * n_orderings + ordering_idx].result;
        };

        auto make_scores = [&](const std::string& ordering_name,
                               const Eigen::VectorXd& greedy_v,
                               const Eigen::VectorXd& expected_v) {
            OrderingScores o;
            o.ordering = ordering_name;
            o.greedy_r = corr_cell(human, greedy_v);
            o.expected_r = corr_cell(human, expected_v);
            // |r| = 1 leaves no room for a bootstrap null; skip the verdict.
            if (!o.greedy_r.degenerate && !o.expected_r.degenerate &&
                std::abs(o.greedy_r.r) < 1.0 && std::abs(o.expected_r.r) < 1.0) {
                o.significance = significance_test(
                    human, o.greedy_r.r, o.expected_r.r, config.shuffles,
                    derive_seed(config.seed, "significance:" + metric + ":" + ordering_name));
            }
            row.orderings.push_back(std::move(o));
        };

        for (std::size_t oi = 0; oi < n_orderings; ++oi) {
            Eigen::VectorXd greedy_v(static_cast<Eigen::Index>(n));
            Eigen::VectorXd expected_v(static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < n; ++j) {
                const LikertResult& r = result_at(j, oi);
                greedy_v[static_cast<Eigen::Index>(j)] = r.greedy;
                expected_v[static_cast<Eigen::Index>(j)] = r.expected;
            }
            make_scores(to_string(config.orderings[oi]), greedy_v, expected_v);
        }

        // Positional average, over the ascending+reversed pair when both are
        // in the grid, over every configured ordering otherwise.
        if (n_orderings >= 2) {
            std::vector<std::size_t> avg_set;
            for (std::size_t oi = 0; oi < n_orderings; ++oi)
                if (config.orderings[oi] == ChoiceOrdering::ascending ||
                    config.orderings[oi] == ChoiceOrdering::reversed)
                    avg_set.push_back(oi);
            if (avg_set.size() != 2) {
                avg_set.resize(n_orderings);
                std::iota(avg_set.begin(), avg_set.end(), std::size_t{0});
            }
            Eigen::VectorXd greedy_v(static_cast<Eigen::Index>(n));
            Eigen::VectorXd expected_v(static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<LikertResult> per_ordering;
                per_ordering.reserve(avg_set.size());
                for (std::size_t oi : avg_set) per_ordering.push_back(result_at(j, oi));
                const AveragedScore avg = positional_average(per_ordering);
                greedy_v[static_cast<Eigen::Index>(j)] = avg.greedy;
                expected_v[static_cast<Eigen::Index>(j)] = avg.expected;
            }
            make_scores("averaged", greedy_v, expected_v);
        }

        report.rows.push_back(std::move(row));
    }

    return output;
}

ScoringOutput run_scoring(const RunConfig& config, const std::vector<AnnotatedExample>& dataset) {
    const std::unique_ptr<LogitSource> source = make_source(config);
    McqPromptSpec spec;
    if (!config.template_path.empty() || !config.choices_path.empty()) {
        if (config.template_path.empty() || config.choices_path.empty())
            throw InvalidInputError("template_path and choices_path must be set together");
        spec = McqPromptSpec::load(config.template_path, config.choices_path);
    } else {
        spec = default_prompt_spec();
    }
    return run_scoring(config, dataset, *source, spec);
}

std::string results_to_jsonl(const std::vector<ExampleScore>& results) {
    std::ostringstream out;
    for (const auto& score : results) {
        const LikertResult& r = score.result;
        json labels = json::object();
        for (std::size_t k = 0; k < kNumLabels; ++k) labels[r.labels[k]] = r.label_probs[k];
        json doc{{"id", r.example_id},     {"metric", score.metric},
                 {"ordering", to_string(r.ordering)}, {"labels", labels},
                 {"greedy", r.greedy},     {"expected", r.expected},
                 {"T", r.temperature}};
        out << doc.dump() << '\n';
    }
    return out.str();
}

TreeRun run_tree(const RunConfig& config, const std::vector<Token>& prompt_tokens) {
    if (prompt_tokens.empty()) throw InvalidInputError("prompt is empty");
    const std::unique_ptr<LogitSource> source = make_source(config);
    TreeRun run;
    run.result = tree_sample(*source, prompt_tokens, config.tree);
    run.table = report_tree(run.result, config.tree_min_probability);
    if (run.result.complete.empty()) {
        char note[160];
        std::snprintf(note, sizeof(note),
                      "(no complete sequences; budget exhausted after %d steps, frontier mass "
                      "%.6f)\n",
                      run.result.steps_used, run.result.mass.frontier);
        run.table += note;
    }
    return run;
}

McqPromptSpec default_prompt_spec() {
    McqPromptSpec spec;
    spec.template_text =
        "You will be shown a news article and one candidate summary of it.\n"
        "Evaluate the {metric-name} of the summary on a scale from 1 (worst) to 5 (best)\n"
        "by picking one of the answer options below.\n"
        "\n"
        "Article:\n"
        "{article}\n"
        "\n"
        "Summary:\n"
        "{summary}\n"
        "\n"
        "Question: how would you rate the {metric-name} of the summary?\n"
        "{choices}\n"
        "\n"
        "Answer with a single letter. Answer: ";
    spec.choice_texts = {"Very poor", "Poor", "Fair", "Good", "Excellent"};
    return spec;
}

}  // namespace dscope
