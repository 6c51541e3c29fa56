#include "dscope/toy_lm.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <unordered_set>

namespace dscope {

using nlohmann::json;

std::string concat_tokens(std::span<const Token> tokens) {
    std::string out;
    for (const auto& t : tokens) out += t;
    return out;
}

ToyLm::ToyLm(std::vector<Token> vocab, int order, Token stop_token,
             std::unordered_map<std::string, std::vector<double>> rows)
    : vocab_(std::move(vocab)), order_(order), stop_(std::move(stop_token)), rows_(std::move(rows)) {
    if (vocab_.empty()) throw InvalidInputError("toy LM vocabulary is empty");
    if (order_ < 1) throw InvalidInputError("toy LM order must be >= 1");
    for (const auto& t : vocab_)
        if (!vocab_set_.insert(t).second)
            throw InvalidInputError("duplicate vocabulary token '" + t + "'");
    if (!vocab_set_.count(stop_))
        throw InvalidInputError("stop token '" + stop_ + "' not in vocabulary");
    for (const auto& [key, logits] : rows_) {
        if (logits.size() != vocab_.size())
            throw InvalidInputError("row '" + key + "' does not cover the whole vocabulary");
        for (double l : logits)
            if (!std::isfinite(l))
                throw InvalidInputError("non-finite logit in row '" + key + "'");
    }
}

std::string ToyLm::context_key(std::span<const Token> tokens) const {
    const std::size_t ctx_len =
        std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(order_ - 1));
    json arr = json::array();
    for (std::size_t i = tokens.size() - ctx_len; i < tokens.size(); ++i)
        arr.push_back(tokens[i]);
    return arr.dump();
}

SourceCapabilities ToyLm::capabilities() const {
    return {static_cast<int>(vocab_.size()), true};
}

LogitVector ToyLm::next_token_logits(std::span<const Token> tokens) const {
    if (tokens.empty()) throw InvalidInputError("token sequence is empty");
    for (const auto& t : tokens)
        if (!vocab_set_.count(t))
            throw UnknownTokenError("token '" + t + "' not in toy LM vocabulary");

    const std::string key = context_key(tokens);
    auto it = rows_.find(key);
    if (it == rows_.end())
        throw UnknownContextError("no toy LM row for context " + key);

    LogitVector out;
    out.entries.reserve(vocab_.size());
    for (std::size_t i = 0; i < vocab_.size(); ++i)
        out.entries.push_back({vocab_[i], it->second[i]});
    return out;
}

ToyLm ToyLm::from_json(const json& doc) {
    std::vector<Token> vocab;
    doc.at("vocab").get_to(vocab);
    const int order = doc.at("order").get<int>();
    const Token stop = doc.at("stop").get<Token>();
    std::unordered_map<std::string, std::vector<double>> rows;
    for (const auto& [key, value] : doc.at("rows").items())
        rows.emplace(key, value.get<std::vector<double>>());
    return ToyLm(std::move(vocab), order, stop, std::move(rows));
}

ToyLm ToyLm::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open toy LM table: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("invalid toy LM table JSON: " + std::string(e.what()));
    }
    return from_json(doc);
}

json ToyLm::to_json() const {
    json rows = json::object();
    for (const auto& [key, logits] : rows_) rows[key] = logits;
    return json{{"vocab", vocab_}, {"order", order_}, {"stop", stop_}, {"rows", rows}};
}

}  // namespace dscope
