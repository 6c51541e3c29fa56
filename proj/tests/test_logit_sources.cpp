#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dscope/fixture_store.hpp"
#include "dscope/toy_lm.hpp"

using namespace dscope;
using nlohmann::json;

namespace {

/// Order-1 toy LM with a uniform row over {a, b, stop}.
ToyLm uniform_unigram() {
    return ToyLm({"a", "b", "<stop>"}, 1, "<stop>",
                 {{"[]", {0.0, 0.0, 0.0}}});
}

/// Order-2 LM: next-token logits depend on the previous token.
ToyLm bigram_lm() {
    std::unordered_map<std::string, std::vector<double>> rows;
    rows[json::array({"a"}).dump()] = {std::log(0.2), std::log(0.3), std::log(0.5)};
    rows[json::array({"b"}).dump()] = {std::log(0.6), std::log(0.3), std::log(0.1)};
    rows[json::array({"<stop>"}).dump()] = {0.0, 0.0, 0.0};
    return ToyLm({"a", "b", "<stop>"}, 2, "<stop>", std::move(rows));
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("logit-sources") {

TEST_CASE("toy LM: uniform row returns equal logits for the whole vocabulary") {
    const ToyLm lm = uniform_unigram();
    const std::vector<Token> prompt{"a"};
    const LogitVector logits = lm.next_token_logits(prompt);
    REQUIRE(logits.entries.size() == 3);
    for (const auto& e : logits.entries) CHECK(e.logit == 0.0);
    CHECK(lm.capabilities().full_vocabulary);
    CHECK(lm.capabilities().max_candidates == 3);
    CHECK_FALSE(lm.returns_logprobs());
}

TEST_CASE("toy LM: bigram rows keyed by previous token") {
    const ToyLm lm = bigram_lm();
    const std::vector<Token> seq{"a", "b"};
    const LogitVector logits = lm.next_token_logits(seq);
    CHECK(logits.entries[0].logit == doctest::Approx(std::log(0.6)));
}

TEST_CASE("toy LM: unknown token and unknown context are distinct errors") {
    const ToyLm lm = bigram_lm();
    const std::vector<Token> bad{"zzz"};
    CHECK_THROWS_AS(lm.next_token_logits(bad), UnknownTokenError);

    ToyLm partial({"a", "b", "<stop>"}, 2, "<stop>",
                  {{json::array({"a"}).dump(), {0.0, 0.0, 0.0}}});
    const std::vector<Token> no_row{"b"};
    CHECK_THROWS_AS(partial.next_token_logits(no_row), UnknownContextError);
}

TEST_CASE("toy LM: construction validates the table") {
    CHECK_THROWS_AS(ToyLm({}, 1, "x", {}), InvalidInputError);
    CHECK_THROWS_AS(ToyLm({"a"}, 0, "a", {}), InvalidInputError);
    CHECK_THROWS_AS(ToyLm({"a", "a"}, 1, "a", {}), InvalidInputError);
    CHECK_THROWS_AS(ToyLm({"a"}, 1, "missing-stop", {}), InvalidInputError);
    // row not covering the vocabulary
    CHECK_THROWS_AS(ToyLm({"a", "b"}, 1, "b", {{"[]", {0.0}}}), InvalidInputError);
}

TEST_CASE("toy LM: JSON round-trip preserves behaviour") {
    const ToyLm lm = bigram_lm();
    const ToyLm reloaded = ToyLm::from_json(lm.to_json());
    const std::vector<Token> seq{"b"};
    const LogitVector a = lm.next_token_logits(seq);
    const LogitVector b = reloaded.next_token_logits(seq);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].token == b.entries[i].token);
        CHECK(a.entries[i].logit == b.entries[i].logit);  // bit-identical
    }
}

TEST_CASE("toy LM: law of total probability over bounded-length sequences") {
    // Enumerate all sequences of extension length <= L; stop-terminated paths
    // plus the still-open frontier must carry total mass 1.
    const ToyLm lm = bigram_lm();
    const int max_len = 5;
    double mass = 0.0;

    struct Node {
        std::vector<Token> seq;
        double logprob;
    };
    std::vector<Node> frontier{{{"a"}, 0.0}};
    for (int depth = 0; depth < max_len; ++depth) {
        std::vector<Node> next;
        for (const auto& node : frontier) {
            const auto dist = softmax_with_temperature(lm.next_token_logits(node.seq), 1.0);
            for (const auto& e : dist.entries) {
                Node child{node.seq, node.logprob + e.logprob};
                child.seq.push_back(e.token);
                if (e.token == lm.stop_token())
                    mass += std::exp(child.logprob);
                else
                    next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }
    for (const auto& node : frontier) mass += std::exp(node.logprob);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fixture store: record then replay returns the identical distribution") {
    FixtureStore store;
    const std::vector<ProbEntry> candidates{{"A", std::log(0.5)},
                                            {"B", std::log(0.3)},
                                            {"C", std::log(0.2)}};
    store.record("What is A?", candidates);

    ReplaySource replay(std::make_shared<FixtureStore>(std::move(store)));
    const TokenDistribution dist = replay.fetch("What is A?");
    REQUIRE(dist.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(dist.entries[i].token == candidates[i].token);
        CHECK(dist.entries[i].logprob == candidates[i].logprob);  // bit-identical
    }
    CHECK_FALSE(dist.complete);
    CHECK(replay.returns_logprobs());
}

TEST_CASE("fixture store: missing prompt raises MissingFixtureError") {
    auto store = std::make_shared<FixtureStore>();
    store->record("known", std::vector<ProbEntry>{{"A", -0.1}});
    ReplaySource replay(store);
    CHECK_THROWS_AS(replay.fetch("unknown"), MissingFixtureError);
    const std::vector<Token> tokens{"unknown"};
    CHECK_THROWS_AS(replay.next_token_logits(tokens), MissingFixtureError);
}

TEST_CASE("fixture store: idempotent re-record, conflict on changed payload") {
    FixtureStore store;
    const std::vector<ProbEntry> candidates{{"A", -0.5}, {"B", -1.5}};
    store.record("p", candidates);
    store.record("p", candidates);  // same payload: fine
    CHECK(store.size() == 1);

    const std::vector<ProbEntry> changed{{"A", -0.5}, {"B", -1.0}};
    CHECK_THROWS_AS(store.record("p", changed), FixtureConflictError);
}

TEST_CASE("fixture store: rejects positive logprobs") {
    FixtureStore store;
    CHECK_THROWS_AS(store.record("p", std::vector<ProbEntry>{{"A", 0.25}}),
                    InvalidInputError);
}

TEST_CASE("fixture store: file round-trip") {
    FixtureStore store;
    store.record("first prompt", std::vector<ProbEntry>{{"A", -0.2}, {" A", -2.0}});
    store.record("second\nprompt with newline", std::vector<ProbEntry>{{"B", -0.7}});

    const auto path = temp_path("dscope_fixtures_test.jsonl");
    store.save(path);
    const FixtureStore loaded = FixtureStore::load(path);
    CHECK(loaded.size() == 2);
    const FixtureRecord* rec = loaded.find("first prompt");
    REQUIRE(rec != nullptr);
    REQUIRE(rec->candidates.size() == 2);
    CHECK(rec->candidates[0].token == "A");
    CHECK(rec->candidates[0].logprob == -0.2);
    CHECK(loaded.find("second\nprompt with newline") != nullptr);
    std::filesystem::remove(path);
}

TEST_CASE("fixture store: load rejects tampered hashes with the line number") {
    const auto path = temp_path("dscope_fixtures_bad.jsonl");
    {
        std::ofstream out(path);
        out << R"({"hash": "0000000000000000", "prompt": "p", "candidates": [["A", -0.1]]})"
            << '\n';
    }
    CHECK_THROWS_AS(FixtureStore::load(path), SchemaError);
    try {
        FixtureStore::load(path);
    } catch (const SchemaError& e) {
        CHECK(e.line() == 1);
    }
    std::filesystem::remove(path);
}

TEST_CASE("prompt hashing: exact bytes, whitespace included") {
    CHECK(canonical_prompt_hash("a b") != canonical_prompt_hash("a  b"));
    CHECK(canonical_prompt_hash("x") == canonical_prompt_hash("x"));
    CHECK(canonical_prompt_hash("").size() == 16);
}

}  // TEST_SUITE
