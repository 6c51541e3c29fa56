#include <doctest.h>

#include <cmath>

#include "dscope/likert.hpp"
#include "dscope/rng.hpp"

using namespace dscope;

namespace {

McqPromptSpec test_spec() {
    McqPromptSpec spec;
    spec.template_text =
        "Rate the {metric-name}.\nArticle: {article}\nSummary: {summary}\n{choices}\nAnswer:";
    spec.choice_texts = {"worst", "bad", "ok", "good", "best"};
    return spec;
}

/// Distribution whose label tokens carry the given raw probabilities
/// (content-indexed probabilities permuted by the caller).
TokenDistribution label_dist(const std::array<double, kNumLabels>& probs) {
    TokenDistribution d;
    const std::array<std::string, kNumLabels> labels{"A", "B", "C", "D", "E"};
    for (std::size_t i = 0; i < kNumLabels; ++i)
        d.entries.push_back({labels[i], std::log(probs[i])});
    std::sort(d.entries.begin(), d.entries.end(), [](const ProbEntry& a, const ProbEntry& b) {
        if (a.logprob != b.logprob) return a.logprob > b.logprob;
        return a.token < b.token;
    });
    d.complete = false;
    return d;
}

const std::array<std::string, kNumLabels> kLabels{"A", "B", "C", "D", "E"};

std::array<double, kNumLabels> random_label_probs(Rng& rng) {
    std::array<double, kNumLabels> q{};
    double sum = 0.0;
    for (auto& v : q) {
        v = uniform(rng, 0.01, 1.0);
        sum += v;
    }
    for (auto& v : q) v /= sum;
    return q;
}

}  // namespace

TEST_SUITE("likert") {

TEST_CASE("render: ascending attaches worst text to A, best to E") {
    const auto spec = test_spec();
    const auto r = render_prompt(spec, "art", "sum", "relevance",
                                 ChoiceOrdering::ascending, 0);
    CHECK(r.text.find("A. worst") != std::string::npos);
    CHECK(r.text.find("E. best") != std::string::npos);
    CHECK(r.text.find("Rate the relevance.") != std::string::npos);
    CHECK(r.text.find("Article: art") != std::string::npos);
    CHECK(r.score_map.scores == std::array<int, 5>{1, 2, 3, 4, 5});
}

TEST_CASE("render: reversed attaches best text to A") {
    const auto spec = test_spec();
    const auto r = render_prompt(spec, "a", "s", "fluency", ChoiceOrdering::reversed, 0);
    CHECK(r.text.find("A. best") != std::string::npos);
    CHECK(r.text.find("E. worst") != std::string::npos);
    CHECK(r.score_map.scores == std::array<int, 5>{5, 4, 3, 2, 1});
}

TEST_CASE("render: random ordering is deterministic per seed") {
    const auto spec = test_spec();
    const auto r1 = render_prompt(spec, "a", "s", "coherence", ChoiceOrdering::random, 42);
    const auto r2 = render_prompt(spec, "a", "s", "coherence", ChoiceOrdering::random, 42);
    CHECK(r1.text == r2.text);
    CHECK(r1.score_map.scores == r2.score_map.scores);

    // score map stays a permutation of 1..5
    std::array<bool, 5> seen{};
    for (int s : r1.score_map.scores) {
        REQUIRE(s >= 1);
        REQUIRE(s <= 5);
        seen[static_cast<std::size_t>(s - 1)] = true;
    }
    for (bool b : seen) CHECK(b);
}

TEST_CASE("render: missing placeholder raises TemplateError") {
    McqPromptSpec spec = test_spec();
    spec.template_text = "no placeholders here";
    CHECK_THROWS_AS(render_prompt(spec, "a", "s", "m", ChoiceOrdering::ascending, 0),
                    TemplateError);
}

TEST_CASE("extract: lone label takes the whole mass") {
    TokenDistribution d;
    d.entries = {{"A", std::log(0.3)}, {"the", std::log(0.5)}, {"x", std::log(0.2)}};
    d.complete = false;
    const auto probs = extract_label_probs(d, kLabels, default_label_variants(kLabels), 10.0);
    CHECK(probs[0] == doctest::Approx(1.0));
    for (std::size_t k = 1; k < kNumLabels; ++k) CHECK(probs[k] == 0.0);
}

TEST_CASE("extract: equal raw label probabilities stay uniform at any T") {
    const auto d = label_dist({0.2, 0.2, 0.2, 0.2, 0.2});
    for (double t : {0.5, 1.0, 10.0, 100.0}) {
        const auto probs = extract_label_probs(d, kLabels, default_label_variants(kLabels), t);
        for (double p : probs) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
    }
}

TEST_CASE("extract: raw [2,1,1,1,1]/6 at T=1 renormalizes to [1/3, 1/6 x4]") {
    const auto d = label_dist({2.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6});
    const auto probs = extract_label_probs(d, kLabels, default_label_variants(kLabels), 1.0);
    CHECK(probs[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
    for (std::size_t k = 1; k < kNumLabels; ++k)
        CHECK(probs[k] == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("extract: variant probabilities are summed before renormalization") {
    TokenDistribution d;
    d.entries = {{"A", std::log(0.2)}, {" A", std::log(0.2)}, {"B", std::log(0.4)}};
    d.complete = false;
    const auto probs = extract_label_probs(d, kLabels, default_label_variants(kLabels), 1.0);
    CHECK(probs[0] == doctest::Approx(0.5).epsilon(1e-12));  // 0.4 vs 0.4
    CHECK(probs[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("extract: no label anywhere raises ScoringError with top candidates") {
    TokenDistribution d;
    d.entries = {{"the", std::log(0.6)}, {"cat", std::log(0.4)}};
    d.complete = false;
    try {
        extract_label_probs(d, kLabels, default_label_variants(kLabels), 10.0);
        FAIL("expected ScoringError");
    } catch (const ScoringError& e) {
        CHECK(e.top_candidates().find("the") != std::string::npos);
        CHECK(e.top_candidates().find("cat") != std::string::npos);
    }
}

TEST_CASE("expected_score: spec examples") {
    const LabelScoreMap ascending;
    CHECK(expected_score({1, 0, 0, 0, 0}, ascending) == doctest::Approx(1.0));
    CHECK(expected_score({0.2, 0.2, 0.2, 0.2, 0.2}, ascending) == doctest::Approx(3.0));
    CHECK(expected_score({0, 0, 0, 0.6, 0.4}, ascending) == doctest::Approx(4.4));
}

TEST_CASE("greedy_score: argmax with lower-score tie-break") {
    const LabelScoreMap ascending;
    CHECK(greedy_score({0.1, 0.2, 0.4, 0.2, 0.1}, ascending) == 3);
    CHECK(greedy_score({0.0, 0.5, 0.0, 0.5, 0.0}, ascending) == 2);
    CHECK(greedy_score({0.1, 0.09, 0.1, 0.2, 0.51}, ascending) == 5);

    // tie-break follows the score map, not the label index
    LabelScoreMap reversed;
    reversed.scores = {5, 4, 3, 2, 1};
    CHECK(greedy_score({0.5, 0.0, 0.0, 0.5, 0.0}, reversed) == 2);
}

TEST_CASE("positional_average: means and validation") {
    LikertResult a;
    a.example_id = "x";
    a.ordering = ChoiceOrdering::ascending;
    a.greedy = 2;
    a.expected = 2.5;
    LikertResult b = a;
    b.ordering = ChoiceOrdering::reversed;
    b.greedy = 4;
    b.expected = 3.5;

    const std::vector<LikertResult> both{a, b};
    const AveragedScore avg = positional_average(both);
    CHECK(avg.greedy == doctest::Approx(3.0));
    CHECK(avg.expected == doctest::Approx(3.0));

    const std::vector<LikertResult> same{a, a};
    CHECK_THROWS_AS(positional_average(same), InvalidInputError);

    LikertResult other = b;
    other.example_id = "y";
    const std::vector<LikertResult> mismatched{a, other};
    CHECK_THROWS_AS(positional_average(mismatched), InvalidInputError);

    const std::vector<LikertResult> single{a};
    CHECK_THROWS_AS(positional_average(single), InvalidInputError);

    // identical scores average to themselves
    LikertResult c = a;
    c.ordering = ChoiceOrdering::random;
    c.greedy = a.greedy;
    c.expected = a.expected;
    const std::vector<LikertResult> idem{a, c};
    const AveragedScore same_avg = positional_average(idem);
    CHECK(same_avg.greedy == doctest::Approx(static_cast<double>(a.greedy)));
    CHECK(same_avg.expected == doctest::Approx(a.expected));
}

TEST_CASE("property: greedy choice is invariant to the extraction temperature") {
    Rng rng(777);
    const auto variants = default_label_variants(kLabels);
    for (int it = 0; it < 200; ++it) {
        const auto q = random_label_probs(rng);
        const auto d = label_dist(q);
        const auto p1 = extract_label_probs(d, kLabels, variants, 1e-3);
        const auto p2 = extract_label_probs(d, kLabels, variants, 1.0);
        const auto p3 = extract_label_probs(d, kLabels, variants, 1e6);
        const LabelScoreMap map;
        CHECK(greedy_score(p1, map) == greedy_score(p2, map));
        CHECK(greedy_score(p2, map) == greedy_score(p3, map));
    }
}

TEST_CASE("property: E(s) limits, uniform at huge T and greedy at tiny T") {
    Rng rng(778);
    const auto variants = default_label_variants(kLabels);
    const LabelScoreMap map;
    for (int it = 0; it < 200; ++it) {
        const auto q = random_label_probs(rng);
        const auto d = label_dist(q);

        const auto hot = extract_label_probs(d, kLabels, variants, 1e6);
        CHECK(std::abs(expected_score(hot, map) - 3.0) < 1e-3);

        const auto cold = extract_label_probs(d, kLabels, variants, 1e-6);
        const auto base = extract_label_probs(d, kLabels, variants, 1.0);
        CHECK(std::abs(expected_score(cold, map) -
                       static_cast<double>(greedy_score(base, map))) < 1e-3);
    }
}

TEST_CASE("property: shifting mass upward strictly increases E(s)") {
    Rng rng(779);
    const LabelScoreMap map;
    for (int it = 0; it < 200; ++it) {
        auto p = random_label_probs(rng);
        const std::size_t lo = uniform_below(rng, 4);
        const std::size_t hi = lo + 1 + uniform_below(rng, 4 - lo);
        const double eps = p[lo] * uniform(rng, 0.1, 0.9);
        auto shifted = p;
        shifted[lo] -= eps;
        shifted[hi] += eps;
        CHECK(expected_score(shifted, map) > expected_score(p, map));
    }
}

TEST_CASE("property: a label holding half the mass is the greedy choice") {
    Rng rng(780);
    const LabelScoreMap map;
    for (int it = 0; it < 100; ++it) {
        const std::size_t big = uniform_below(rng, 5);
        std::array<double, kNumLabels> p{};
        const double major = uniform(rng, 0.5, 0.95);
        double rest = 1.0 - major;
        for (std::size_t k = 0; k < kNumLabels; ++k)
            if (k != big) p[k] = rest / 4.0;
        p[big] = major;
        CHECK(greedy_score(p, map) == map.scores[big]);
    }
}

TEST_CASE("order-symmetric source: averaged score equals single-ordering score") {
    // A content-driven responder: the probability attached to a choice text
    // follows the text wherever the ordering puts it. Scores must then be
    // identical across orderings, and averaging is a no-op (to 1e-12).
    const auto spec = test_spec();
    const auto variants = default_label_variants(spec.labels);
    Rng rng(4242);
    for (int it = 0; it < 50; ++it) {
        const auto content_probs = random_label_probs(rng);  // indexed worst..best

        auto score_for = [&](ChoiceOrdering ordering) {
            const auto rendered =
                render_prompt(spec, "a", "s", "relevance", ordering, 7);
            // label i shows content perm[i]; p(label i) = q[perm[i]]
            std::array<double, kNumLabels> label_probs{};
            for (std::size_t i = 0; i < kNumLabels; ++i)
                label_probs[i] =
                    content_probs[static_cast<std::size_t>(rendered.score_map.scores[i] - 1)];
            const auto d = label_dist(label_probs);
            const auto probs = extract_label_probs(d, spec.labels, variants, 10.0);
            LikertResult r;
            r.example_id = "e";
            r.ordering = ordering;
            r.greedy = greedy_score(probs, rendered.score_map);
            r.expected = expected_score(probs, rendered.score_map);
            return r;
        };

        const LikertResult asc = score_for(ChoiceOrdering::ascending);
        const LikertResult rev = score_for(ChoiceOrdering::reversed);
        const std::vector<LikertResult> both{asc, rev};
        const AveragedScore avg = positional_average(both);
        CHECK(std::abs(avg.expected - asc.expected) < 1e-12);
        CHECK(avg.greedy == doctest::Approx(static_cast<double>(asc.greedy)));
    }
}

}  // TEST_SUITE
