#include "dscope/distributions.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace dscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool entry_before(const ProbEntry& a, const ProbEntry& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.token < b.token;
}

void sort_entries(std::vector<ProbEntry>& entries) {
    std::sort(entries.begin(), entries.end(), entry_before);
}

}  // namespace

void LogitVector::validate() const {
    if (entries.empty()) throw InvalidInputError("logit vector is empty");
    std::unordered_set<std::string_view> seen;
    seen.reserve(entries.size());
    for (const auto& e : entries) {
        if (!std::isfinite(e.logit))
            throw InvalidInputError("non-finite logit for token '" + e.token + "'");
        if (!seen.insert(e.token).second)
            throw InvalidInputError("duplicate token '" + e.token + "' in logit vector");
    }
}

double TokenDistribution::prob(std::size_t i) const { return std::exp(entries[i].logprob); }

double TokenDistribution::total_mass() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += std::exp(e.logprob);
    return sum;
}

const ProbEntry* TokenDistribution::find(const Token& token) const {
    for (const auto& e : entries)
        if (e.token == token) return &e;
    return nullptr;
}

void TokenDistribution::validate() const {
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (!entry_before(entries[i - 1], entries[i]) &&
            !(entries[i - 1].logprob == entries[i].logprob &&
              entries[i - 1].token == entries[i].token))
            throw InvalidInputError("distribution entries not sorted");
    }
    if (complete) {
        const double mass = total_mass();
        if (std::abs(mass - 1.0) > 1e-9)
            throw InvalidInputError("complete distribution mass " + std::to_string(mass) +
                                    " deviates from 1 by more than 1e-9");
    }
}

namespace detail {

std::vector<double> stable_log_softmax(const std::vector<double>& logits, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw InvalidInputError("temperature must be a positive finite number");
    Eigen::ArrayXd scaled(static_cast<Eigen::Index>(logits.size()));
    double max_scaled = -kInf;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        if (std::isnan(logits[i]) || logits[i] == kInf)
            throw InvalidInputError("logit must be finite or -inf");
        scaled[static_cast<Eigen::Index>(i)] = logits[i] / temperature;
        max_scaled = std::max(max_scaled, scaled[static_cast<Eigen::Index>(i)]);
    }
    if (max_scaled == -kInf) throw InvalidInputError("all logits are -inf");
    const Eigen::ArrayXd shifted = scaled - max_scaled;
    const double log_norm = std::log(shifted.exp().sum());
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i)
        out[i] = shifted[static_cast<Eigen::Index>(i)] - log_norm;
    return out;
}

}  // namespace detail

TokenDistribution softmax_with_temperature(const LogitVector& logits, double temperature) {
    logits.validate();
    std::vector<double> raw(logits.entries.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = logits.entries[i].logit;
    const std::vector<double> logprobs = detail::stable_log_softmax(raw, temperature);

    TokenDistribution dist;
    dist.temperature = temperature;
    dist.complete = true;
    dist.entries.reserve(logits.entries.size());
    for (std::size_t i = 0; i < logprobs.size(); ++i)
        dist.entries.push_back({logits.entries[i].token, logprobs[i]});
    sort_entries(dist.entries);
    return dist;
}

TokenDistribution top_p_candidates(const TokenDistribution& dist, double p_hat) {
    if (!(p_hat > 0.0) || p_hat > 1.0 || std::isnan(p_hat))
        throw InvalidInputError("top-p threshold must lie in (0, 1]");
    dist.validate();

    // p = 1 keeps the whole support (identity). Below that, a 1e-12 slack on
    // the cumulative sum keeps boundary cases (e.g. 3 x 0.2 vs 0.6) stable.
    constexpr double kSlack = 1e-12;
    TokenDistribution out;
    out.temperature = dist.temperature;
    double cum = 0.0;
    std::size_t kept = dist.entries.size();
    if (p_hat < 1.0) {
        for (std::size_t i = 0; i < dist.entries.size(); ++i) {
            cum += std::exp(dist.entries[i].logprob);
            if (cum >= p_hat - kSlack) {
                kept = i + 1;
                break;
            }
        }
    }
    out.entries.assign(dist.entries.begin(), dist.entries.begin() + static_cast<long>(kept));
    out.complete = dist.complete && kept == dist.entries.size();
    return out;
}

TokenDistribution renormalize_over(const TokenDistribution& dist,
                                   const std::vector<Token>& support,
                                   double temperature) {
    if (support.empty()) throw InvalidInputError("support set is empty");
    {
        std::unordered_set<std::string_view> seen;
        for (const auto& t : support)
            if (!seen.insert(t).second)
                throw InvalidInputError("duplicate token '" + t + "' in support");
    }

    std::vector<double> logits(support.size(), -kInf);
    bool any_present = false;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (const ProbEntry* e = dist.find(support[i])) {
            logits[i] = e->logprob;
            any_present = true;
        }
    }
    if (!any_present)
        throw EmptySupportError("no support token present in the distribution");

    const std::vector<double> logprobs = detail::stable_log_softmax(logits, temperature);
    TokenDistribution out;
    out.temperature = temperature;
    out.complete = true;
    out.entries.reserve(support.size());
    for (std::size_t i = 0; i < support.size(); ++i)
        out.entries.push_back({support[i], logprobs[i]});
    sort_entries(out.entries);
    return out;
}

}  // namespace dscope
