#include "dscope/likert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "dscope/rng.hpp"

namespace dscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void replace_all(std::string& text, const std::string& placeholder, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
}

/// perm[i] = index (0-based, worst..best) of the choice text shown at label i.
std::array<std::size_t, kNumLabels> choice_permutation(ChoiceOrdering ordering,
                                                       std::uint64_t seed) {
    std::array<std::size_t, kNumLabels> perm{};
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    switch (ordering) {
        case ChoiceOrdering::ascending:
            break;
        case ChoiceOrdering::reversed:
            std::reverse(perm.begin(), perm.end());
            break;
        case ChoiceOrdering::random: {
            Rng rng(seed);
            std::vector<std::size_t> p = random_permutation(kNumLabels, rng);
            std::copy(p.begin(), p.end(), perm.begin());
            break;
        }
    }
    return perm;
}

}  // namespace

std::string to_string(ChoiceOrdering ordering) {
    switch (ordering) {
        case ChoiceOrdering::ascending: return "ascending";
        case ChoiceOrdering::reversed: return "reversed";
        case ChoiceOrdering::random: return "random";
    }
    return "?";
}

ChoiceOrdering ordering_from_string(const std::string& name) {
    if (name == "ascending") return ChoiceOrdering::ascending;
    if (name == "reversed") return ChoiceOrdering::reversed;
    if (name == "random") return ChoiceOrdering::random;
    throw InvalidInputError("unknown ordering '" + name + "'");
}

McqPromptSpec McqPromptSpec::load(const std::filesystem::path& template_path,
                                  const std::filesystem::path& choices_path) {
    McqPromptSpec spec;
    spec.template_text = read_text_file(template_path);

    std::ifstream in(choices_path);
    if (!in) throw Error("cannot open choices file: " + choices_path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    if (lines.size() != kNumLabels)
        throw InvalidInputError("choices file must hold exactly 5 non-empty lines, got " +
                                std::to_string(lines.size()));
    std::copy(lines.begin(), lines.end(), spec.choice_texts.begin());
    return spec;
}

RenderedPrompt render_prompt(const McqPromptSpec& spec, const std::string& article,
                             const std::string& summary, const std::string& metric_name,
                             ChoiceOrdering ordering, std::uint64_t seed) {
    for (const char* placeholder : {"{article}", "{summary}", "{metric-name}", "{choices}"})
        if (spec.template_text.find(placeholder) == std::string::npos)
            throw TemplateError(std::string("template is missing placeholder ") + placeholder);

    const auto perm = choice_permutation(ordering, seed);

    std::string choices;
    RenderedPrompt out;
    out.ordering = ordering;
    out.seed = seed;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
        choices += spec.labels[i] + ". " + spec.choice_texts[perm[i]];
        if (i + 1 < kNumLabels) choices += '\n';
        out.score_map.scores[i] = static_cast<int>(perm[i]) + 1;
    }

    out.text = spec.template_text;
    replace_all(out.text, "{article}", article);
    replace_all(out.text, "{summary}", summary);
    replace_all(out.text, "{metric-name}", metric_name);
    replace_all(out.text, "{choices}", choices);
    return out;
}

LabelVariants default_label_variants(const std::array<std::string, kNumLabels>& labels) {
    LabelVariants variants;
    for (std::size_t i = 0; i < kNumLabels; ++i)
        variants[i] = {labels[i], " " + labels[i]};
    return variants;
}

std::array<double, kNumLabels> extract_label_probs(
    const TokenDistribution& dist, const std::array<std::string, kNumLabels>& labels,
    const LabelVariants& variants, double temperature) {
    std::array<double, kNumLabels> raw{};
    bool any = false;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
        double mass = 0.0;
        for (const auto& variant : variants[k])
            if (const ProbEntry* e = dist.find(variant)) mass += std::exp(e->logprob);
        raw[k] = mass;
        any = any || mass > 0.0;
    }
    if (!any) {
        std::string top;
        const std::size_t show = std::min<std::size_t>(dist.entries.size(), 10);
        for (std::size_t i = 0; i < show; ++i) {
            if (i) top += ", ";
            top += "'" + dist.entries[i].token + "'";
        }
        throw ScoringError("no label token (" + labels[0] + ".." + labels[kNumLabels - 1] +
                               ") found among the distribution's candidates",
                           top);
    }

    std::vector<double> logits(kNumLabels);
    for (std::size_t k = 0; k < kNumLabels; ++k)
        logits[k] = raw[k] > 0.0 ? std::log(raw[k]) : -kInf;
    const std::vector<double> logprobs = detail::stable_log_softmax(logits, temperature);

    std::array<double, kNumLabels> probs{};
    for (std::size_t k = 0; k < kNumLabels; ++k) probs[k] = std::exp(logprobs[k]);
    return probs;
}

double expected_score(const std::array<double, kNumLabels>& label_probs,
                      const LabelScoreMap& score_map) {
    const double total = std::accumulate(label_probs.begin(), label_probs.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6)
        throw InvalidInputError("label probabilities sum to " + std::to_string(total) +
                                ", expected 1");
    double value = 0.0;
    for (std::size_t k = 0; k < kNumLabels; ++k)
        value += static_cast<double>(score_map.scores[k]) * label_probs[k];
    return value;
}

int greedy_score(const std::array<double, kNumLabels>& label_probs,
                 const LabelScoreMap& score_map) {
    const double total = std::accumulate(label_probs.begin(), label_probs.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-6)
        throw InvalidInputError("label probabilities sum to " + std::to_string(total) +
                                ", expected 1");
    double best_prob = -1.0;
    int best_score = 0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
        if (label_probs[k] > best_prob ||
            (label_probs[k] == best_prob && score_map.scores[k] < best_score)) {
            best_prob = label_probs[k];
            best_score = score_map.scores[k];
        }
    }
    return best_score;
}

AveragedScore positional_average(std::span<const LikertResult> results) {
    if (results.size() < 2)
        throw InvalidInputError("positional average needs at least 2 orderings");
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].example_id != results[0].example_id)
            throw InvalidInputError("positional average across mismatched example ids '" +
                                    results[0].example_id + "' and '" +
                                    results[i].example_id + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (results[i].ordering == results[j].ordering)
                throw InvalidInputError("positional average requires distinct orderings");
    }
    AveragedScore avg;
    for (const auto& r : results) {
        avg.greedy += static_cast<double>(r.greedy);
        avg.expected += r.expected;
    }
    avg.greedy /= static_cast<double>(results.size());
    avg.expected /= static_cast<double>(results.size());
    return avg;
}

}  // namespace dscope
