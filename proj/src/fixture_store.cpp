#include "dscope/fixture_store.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dscope/rng.hpp"

namespace dscope {

using nlohmann::json;

namespace {

void sort_candidates(std::vector<ProbEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const ProbEntry& a, const ProbEntry& b) {
        if (a.logprob != b.logprob) return a.logprob > b.logprob;
        return a.token < b.token;
    });
}

void validate_candidates(const std::vector<ProbEntry>& entries) {
    if (entries.empty()) throw InvalidInputError("fixture candidate list is empty");
    for (const auto& e : entries) {
        if (std::isnan(e.logprob) || e.logprob > 1e-12)
            throw InvalidInputError("fixture logprob for token '" + e.token +
                                    "' must be <= 0");
    }
}

bool same_payload(const std::vector<ProbEntry>& a, const std::vector<ProbEntry>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].token != b[i].token || a[i].logprob != b[i].logprob) return false;
    return true;
}

}  // namespace

std::string canonical_prompt_hash(std::string_view prompt) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(prompt)));
    return buf;
}

void FixtureStore::record(std::string_view prompt, std::span<const ProbEntry> candidates) {
    record(prompt, std::vector<ProbEntry>(candidates.begin(), candidates.end()));
}

void FixtureStore::record(std::string_view prompt, std::vector<ProbEntry> candidates) {
    sort_candidates(candidates);
    validate_candidates(candidates);
    FixtureRecord rec{canonical_prompt_hash(prompt), std::string(prompt), std::move(candidates)};

    std::lock_guard lock(mutex_);
    auto it = by_hash_.find(rec.hash_hex);
    if (it != by_hash_.end()) {
        if (it->second.prompt != rec.prompt)
            throw FixtureConflictError("prompt hash collision on " + rec.hash_hex);
        if (!same_payload(it->second.candidates, rec.candidates))
            throw FixtureConflictError("conflicting fixture payload for prompt hash " +
                                       rec.hash_hex);
        return;  // idempotent
    }
    order_.push_back(rec.hash_hex);
    by_hash_.emplace(rec.hash_hex, std::move(rec));
}

const FixtureRecord* FixtureStore::find(std::string_view prompt) const {
    const std::string hash = canonical_prompt_hash(prompt);
    std::lock_guard lock(mutex_);
    auto it = by_hash_.find(hash);
    if (it == by_hash_.end()) return nullptr;
    if (it->second.prompt != std::string(prompt)) return nullptr;
    return &it->second;
}

std::vector<const FixtureRecord*> FixtureStore::records() const {
    std::lock_guard lock(mutex_);
    std::vector<const FixtureRecord*> out;
    out.reserve(order_.size());
    for (const auto& hash : order_) out.push_back(&by_hash_.at(hash));
    return out;
}

FixtureStore FixtureStore::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open fixture file: " + path.string());
    FixtureStore store;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError("invalid fixture JSON: " + std::string(e.what()), line_no);
        }
        try {
            const std::string prompt = doc.at("prompt").get<std::string>();
            std::vector<ProbEntry> candidates;
            for (const auto& pair : doc.at("candidates")) {
                if (!pair.is_array() || pair.size() != 2)
                    throw SchemaError("candidate must be a [token, logprob] pair", line_no);
                candidates.push_back(
                    {pair[0].get<std::string>(), pair[1].get<double>()});
            }
            const std::string recorded_hash = doc.at("hash").get<std::string>();
            if (recorded_hash != canonical_prompt_hash(prompt))
                throw SchemaError("hash does not match prompt bytes", line_no);
            store.record(prompt, std::move(candidates));
        } catch (const json::exception& e) {
            throw SchemaError("invalid fixture record: " + std::string(e.what()), line_no);
        } catch (const InvalidInputError& e) {
            throw SchemaError(e.what(), line_no);
        }
    }
    return store;
}

void FixtureStore::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write fixture file: " + path.string());
    for (const FixtureRecord* rec : records()) {
        json candidates = json::array();
        for (const auto& e : rec->candidates) candidates.push_back({e.token, e.logprob});
        json doc{{"hash", rec->hash_hex}, {"prompt", rec->prompt}, {"candidates", candidates}};
        out << doc.dump() << '\n';
    }
}

ReplaySource::ReplaySource(std::shared_ptr<const FixtureStore> store)
    : store_(std::move(store)) {
    if (!store_) throw InvalidInputError("replay source requires a fixture store");
}

SourceCapabilities ReplaySource::capabilities() const {
    int k = 0;
    for (const FixtureRecord* rec : store_->records())
        k = std::max(k, static_cast<int>(rec->candidates.size()));
    return {k, false};
}

TokenDistribution ReplaySource::fetch(std::string_view prompt) const {
    const FixtureRecord* rec = store_->find(prompt);
    if (!rec)
        throw MissingFixtureError("no fixture for prompt hash " +
                                  canonical_prompt_hash(prompt));
    TokenDistribution dist;
    dist.entries = rec->candidates;
    dist.temperature = 1.0;
    dist.complete = false;
    return dist;
}

LogitVector ReplaySource::next_token_logits(std::span<const Token> tokens) const {
    if (tokens.empty()) throw InvalidInputError("token sequence is empty");
    const TokenDistribution dist = fetch(concat_tokens(tokens));
    LogitVector out;
    out.entries.reserve(dist.entries.size());
    for (const auto& e : dist.entries) out.entries.push_back({e.token, e.logprob});
    return out;
}

}  // namespace dscope
