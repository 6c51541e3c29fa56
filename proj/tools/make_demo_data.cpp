// Regenerates the committed demo dataset + fixture set (data/demo/dataset20.jsonl,
// data/fixtures/demo20.jsonl). The fixtures simulate a graded, mildly noisy
// judge whose answer follows the choice text rather than the label position.
//
// Usage: make_demo_data <repo-root>

#include <cmath>
#include <filesystem>
#include <iostream>

#include "dscope/dataset.hpp"
#include "dscope/fixture_store.hpp"
#include "dscope/likert.hpp"
#include "dscope/rng.hpp"

using namespace dscope;

namespace {

constexpr std::uint64_t kRunSeed = 42;

std::array<double, 5> graded_probs(double s_star, double tau, double noise_sd, Rng& rng) {
    std::array<double, 5> q{};
    double sum = 0.0;
    for (int k = 1; k <= 5; ++k) {
        const double logit = -std::abs(k - s_star) / tau + noise_sd * standard_normal(rng);
        q[static_cast<std::size_t>(k - 1)] = std::exp(logit);
        sum += q[static_cast<std::size_t>(k - 1)];
    }
    for (auto& v : q) v /= sum;
    return q;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_demo_data <repo-root>\n";
        return 2;
    }
    const std::filesystem::path root = argv[1];

    const char* articles[4] = {
        "The city council approved the new transit plan on Monday.",
        "Researchers published results from a decade-long climate survey.",
        "The local team won the championship after a dramatic overtime.",
        "A new library opened downtown with over fifty thousand books.",
    };
    const char* summaries[4] = {
        "Council approves transit plan.",
        "Climate survey results released after ten years.",
        "Team wins title in overtime.",
        "Downtown library opens with large collection.",
    };

    std::vector<AnnotatedExample> dataset;
    for (int i = 0; i < 20; ++i) {
        AnnotatedExample ex;
        char id[16];
        std::snprintf(id, sizeof(id), "demo-%02d", i + 1);
        ex.id = id;
        ex.article = std::string(articles[i % 4]) + " It was filed as report number " +
                     std::to_string(i + 1) + ".";
        ex.summary = std::string(summaries[i % 4]) + " (report " + std::to_string(i + 1) + ")";
        const double base = 1.0 + 4.0 * static_cast<double>(i) / 19.0;
        Rng hrng(derive_seed(kRunSeed, std::string("human:") + id));
        for (const auto& metric : kMetricNames) {
            const double jitter = 0.35 * standard_normal(hrng);
            ex.human[metric] = std::min(5.0, std::max(1.0, base + jitter));
        }
        dataset.push_back(std::move(ex));
    }
    write_dataset(root / "data/demo/dataset20.jsonl", dataset);

    const McqPromptSpec spec = McqPromptSpec::load(root / "data/templates/mcq_template.txt",
                                                   root / "data/templates/choices.txt");
    FixtureStore store;
    for (const auto& ex : dataset) {
        const std::uint64_t example_seed = derive_seed(kRunSeed, ex.id);
        for (const auto& metric : kMetricNames) {
            Rng nrng(derive_seed(kRunSeed, "noise:" + ex.id + ":" + metric));
            for (ChoiceOrdering ordering :
                 {ChoiceOrdering::ascending, ChoiceOrdering::reversed}) {
                const auto rendered = render_prompt(spec, ex.article, ex.summary, metric,
                                                    ordering, example_seed);
                const auto q = graded_probs(ex.human.at(metric), 0.9, 0.6, nrng);
                std::vector<ProbEntry> candidates;
                for (std::size_t i = 0; i < kNumLabels; ++i) {
                    const auto content =
                        static_cast<std::size_t>(rendered.score_map.scores[i] - 1);
                    candidates.push_back({spec.labels[i], std::log(q[content])});
                }
                store.record(rendered.text, candidates);
            }
        }
    }
    store.save(root / "data/fixtures/demo20.jsonl");
    std::cout << "wrote " << dataset.size() << " examples and " << store.size()
              << " fixtures\n";
    return 0;
}
