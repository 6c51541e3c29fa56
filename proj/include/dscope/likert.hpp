#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dscope/distributions.hpp"

namespace dscope {

inline constexpr std::size_t kNumLabels = 5;

enum class ChoiceOrdering { ascending, reversed, random };

std::string to_string(ChoiceOrdering ordering);
ChoiceOrdering ordering_from_string(const std::string& name);

/// MCQ Likert prompt: a template with {article}, {summary}, {metric-name} and
/// {choices} placeholders, five labels (default A..E) and five choice texts
/// ordered worst to best.
struct McqPromptSpec {
    std::string template_text;
    std::array<std::string, kNumLabels> labels{"A", "B", "C", "D", "E"};
    std::array<std::string, kNumLabels> choice_texts;  // worst -> best

    static McqPromptSpec load(const std::filesystem::path& template_path,
                              const std::filesystem::path& choices_path);
};

/// F: label -> Likert score. scores[i] is the score carried by labels[i]
/// under the ordering the prompt was rendered with; always a permutation of
/// {1, ..., 5}.
struct LabelScoreMap {
    std::array<int, kNumLabels> scores{1, 2, 3, 4, 5};
};

struct RenderedPrompt {
    std::string text;
    LabelScoreMap score_map;
    ChoiceOrdering ordering;
    std::uint64_t seed = 0;  // meaningful for random ordering only
};

/// Renders the prompt with choice texts in the requested order. Labels always
/// appear in their fixed order; only the attached texts move. Deterministic
/// given the seed.
RenderedPrompt render_prompt(const McqPromptSpec& spec, const std::string& article,
                             const std::string& summary, const std::string& metric_name,
                             ChoiceOrdering ordering, std::uint64_t seed);

/// Variant token strings accepted for each label (tokenizers differ on
/// leading whitespace). Probability is summed over matched variants.
using LabelVariants = std::array<std::vector<std::string>, kNumLabels>;

LabelVariants default_label_variants(const std::array<std::string, kNumLabels>& labels);

/// Per-label probabilities: raw probability mass is summed over each label's
/// variants, the log of those sums is treated as the label logit, and the five
/// labels are renormalized with a softmax at `temperature`. Throws
/// ScoringError (with the distribution's top candidates) when no label
/// variant is present.
std::array<double, kNumLabels> extract_label_probs(const TokenDistribution& dist,
                                                   const std::array<std::string, kNumLabels>& labels,
                                                   const LabelVariants& variants,
                                                   double temperature);

/// E(s) = sum_k F(label_k) * p(label_k); lies in [1, 5].
double expected_score(const std::array<double, kNumLabels>& label_probs,
                      const LabelScoreMap& score_map);

/// F(argmax p); exact probability ties resolve toward the lower score.
int greedy_score(const std::array<double, kNumLabels>& label_probs,
                 const LabelScoreMap& score_map);

struct LikertResult {
    std::string example_id;
    ChoiceOrdering ordering = ChoiceOrdering::ascending;
    std::array<std::string, kNumLabels> labels{"A", "B", "C", "D", "E"};
    std::array<double, kNumLabels> label_probs{};
    LabelScoreMap score_map;
    int greedy = 0;
    double expected = 0.0;
    double temperature = 0.0;
};

struct AveragedScore {
    double greedy = 0.0;
    double expected = 0.0;
};

/// Arithmetic mean of per-ordering scores for one example, applied separately
/// to the greedy and expected streams. Requires >= 2 results with the same
/// example id and pairwise distinct orderings.
AveragedScore positional_average(std::span<const LikertResult> results);

}  // namespace dscope
