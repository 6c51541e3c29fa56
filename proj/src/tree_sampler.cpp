#include "dscope/tree_sampler.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>

namespace dscope {

using nlohmann::json;

void TreeConfig::validate() const {
    if (!(top_p > 0.0) || top_p > 1.0) throw InvalidInputError("top_p must lie in (0, 1]");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw InvalidInputError("temperature must be positive and finite");
    if (min_cum_logprob > 0.0)
        throw InvalidInputError("min_cum_logprob (alpha) must be <= 0");
    if (max_steps < 0) throw InvalidInputError("max_steps must be >= 0");
    if (max_length < 1) throw InvalidInputError("max_length must be >= 1");
}

std::string to_string(SequenceStatus status) {
    switch (status) {
        case SequenceStatus::complete: return "complete";
        case SequenceStatus::incomplete_alpha: return "incomplete-alpha";
        case SequenceStatus::incomplete_budget: return "incomplete-budget";
    }
    return "?";
}

std::string ScoredSequence::text() const {
    std::string out;
    for (const auto& t : tokens) out += t;
    return out;
}

namespace {

struct QueueItem {
    std::vector<Token> extension;
    double cum_logprob = 0.0;
    std::uint64_t insertion = 0;
};

// Max-heap on cum_logprob; FIFO on insertion order for equal priorities.
struct QueueOrder {
    bool operator()(const QueueItem& a, const QueueItem& b) const {
        if (a.cum_logprob != b.cum_logprob) return a.cum_logprob < b.cum_logprob;
        return a.insertion > b.insertion;
    }
};

bool sequence_before(const ScoredSequence& a, const ScoredSequence& b) {
    if (a.cum_logprob != b.cum_logprob) return a.cum_logprob > b.cum_logprob;
    return a.tokens < b.tokens;
}

}  // namespace

TreeSampleResult tree_sample(const LogitSource& source, std::span<const Token> prompt,
                             const TreeConfig& config) {
    if (prompt.empty()) throw InvalidInputError("prompt is empty");
    config.validate();

    const std::unordered_set<Token> stop_set(config.stop_tokens.begin(),
                                             config.stop_tokens.end());

    std::priority_queue<QueueItem, std::vector<QueueItem>, QueueOrder> queue;
    std::uint64_t insertions = 0;
    queue.push({{}, 0.0, insertions++});

    TreeSampleResult result;
    std::vector<Token> scratch(prompt.begin(), prompt.end());

    auto drain_frontier = [&]() {
        while (!queue.empty()) {
            const QueueItem& item = queue.top();
            result.frontier.push_back(
                {item.extension, item.cum_logprob, SequenceStatus::incomplete_budget});
            result.mass.frontier += std::exp(item.cum_logprob);
            queue.pop();
        }
    };

    while (!queue.empty() && result.steps_used < config.max_steps) {
        const QueueItem node = queue.top();
        queue.pop();
        if (config.record_pop_trace) result.pop_trace.push_back(node.cum_logprob);

        scratch.resize(prompt.size());
        scratch.insert(scratch.end(), node.extension.begin(), node.extension.end());

        LogitVector logits;
        try {
            logits = source.next_token_logits(scratch);
        } catch (const std::exception& e) {
            // Re-file the popped node so its mass is not lost, then abort.
            queue.push(node);
            drain_frontier();
            std::sort(result.complete.begin(), result.complete.end(), sequence_before);
            std::sort(result.incomplete.begin(), result.incomplete.end(), sequence_before);
            throw TreeSampleError(std::string("logit source failed: ") + e.what(),
                                  std::move(result));
        }
        ++result.steps_used;

        const TokenDistribution dist = softmax_with_temperature(logits, config.temperature);
        const TokenDistribution kept = top_p_candidates(dist, config.top_p);

        double kept_mass = 0.0;
        for (const auto& e : kept.entries) kept_mass += std::exp(e.logprob);
        const double log_kept_mass = std::log(kept_mass);
        if (!config.nucleus_renormalize)
            result.mass.dropped_by_top_p += std::exp(node.cum_logprob) * (1.0 - kept_mass);

        for (const auto& e : kept.entries) {
            const double step_logprob =
                config.nucleus_renormalize ? e.logprob - log_kept_mass : e.logprob;
            const double child_logprob = node.cum_logprob + step_logprob;
            std::vector<Token> child_tokens = node.extension;
            child_tokens.push_back(e.token);

            if (stop_set.count(e.token)) {
                result.complete.push_back(
                    {std::move(child_tokens), child_logprob, SequenceStatus::complete});
                result.mass.complete += std::exp(child_logprob);
            } else if (static_cast<int>(child_tokens.size()) >= config.max_length) {
                result.incomplete.push_back(
                    {std::move(child_tokens), child_logprob, SequenceStatus::incomplete_budget});
                result.mass.incomplete += std::exp(child_logprob);
            } else if (child_logprob >= config.min_cum_logprob) {
                queue.push({std::move(child_tokens), child_logprob, insertions++});
            } else {
                result.incomplete.push_back(
                    {std::move(child_tokens), child_logprob, SequenceStatus::incomplete_alpha});
                result.mass.incomplete += std::exp(child_logprob);
            }
        }
    }

    drain_frontier();
    std::sort(result.complete.begin(), result.complete.end(), sequence_before);
    std::sort(result.incomplete.begin(), result.incomplete.end(), sequence_before);
    return result;
}

const std::vector<double>& pop_order_trace(const TreeSampleResult& result) {
    if (result.pop_trace.empty() && result.steps_used > 0)
        throw InvalidInputError("run was not instrumented with record_pop_trace");
    return result.pop_trace;
}

std::string report_tree(const TreeSampleResult& result, double min_probability) {
    std::ostringstream out;
    out << "Probability  Output\n";
    for (const auto& seq : result.complete) {
        const double p = std::exp(seq.cum_logprob);
        if (p < min_probability) continue;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%-11.3g", p);
        out << buf << "  " << seq.text() << '\n';
    }
    return out.str();
}

namespace {

json sequences_to_json(const std::vector<ScoredSequence>& sequences) {
    json arr = json::array();
    for (const auto& seq : sequences) {
        arr.push_back({{"tokens", seq.tokens},
                       {"text", seq.text()},
                       {"logprob", seq.cum_logprob},
                       {"status", to_string(seq.status)}});
    }
    return arr;
}

}  // namespace

json tree_result_to_json(const TreeSampleResult& result, const TreeConfig& config) {
    json alpha;
    if (std::isfinite(config.min_cum_logprob))
        alpha = config.min_cum_logprob;  // -inf is JSON null
    return json{
        {"config",
         {{"top_p", config.top_p},
          {"temperature", config.temperature},
          {"alpha", alpha},
          {"stop_tokens", config.stop_tokens},
          {"max_steps", config.max_steps},
          {"max_length", config.max_length},
          {"nucleus_renormalize", config.nucleus_renormalize}}},
        {"complete", sequences_to_json(result.complete)},
        {"incomplete", sequences_to_json(result.incomplete)},
        {"frontier", sequences_to_json(result.frontier)},
        {"mass",
         {{"complete", result.mass.complete},
          {"incomplete", result.mass.incomplete},
          {"frontier", result.mass.frontier},
          {"dropped_by_top_p", result.mass.dropped_by_top_p}}},
        {"steps_used", result.steps_used}};
}

}  // namespace dscope
