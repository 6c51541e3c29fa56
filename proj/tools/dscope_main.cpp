// dscope: decoding-analysis CLI.
//
//   dscope score           expected-value vs greedy Likert scoring + correlations
//   dscope tree            best-first enumeration of probable completions
//   dscope stats           bootstrap significance for a correlation difference
//   dscope convert-dataset SummEval release layout -> neutral dataset JSONL
//   dscope record-fixtures fetch + record distributions for offline replay

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "dscope/dataset.hpp"
#include "dscope/pipeline.hpp"
#include "dscope/rng.hpp"
#include "dscope/stats.hpp"

namespace {

using dscope::RunConfig;
using nlohmann::json;

std::vector<dscope::ChoiceOrdering> parse_orderings(const std::vector<std::string>& names) {
    std::vector<dscope::ChoiceOrdering> out;
    for (const auto& name : names) out.push_back(dscope::ordering_from_string(name));
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dscope::Error("cannot write " + path.string());
    out << payload;
}

/// JSONL {"id": ..., "value": ...} series, joined later by id.
std::map<std::string, double> load_series_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw dscope::Error("cannot open series file: " + path);
    std::map<std::string, double> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw dscope::SchemaError("invalid JSON: " + std::string(e.what()), line_no);
        }
        const std::string id = doc.at("id").get<std::string>();
        if (!out.emplace(id, doc.at("value").get<double>()).second)
            throw dscope::SchemaError("duplicate id '" + id + "'", line_no);
    }
    return out;
}

struct ConfigFlags {
    // options shared by score / record-fixtures / tree
    std::string config_path;
    RunConfig cli;  // values bound to CLI flags before merging
    std::vector<std::string> orderings;
    std::vector<std::string> formats;
    std::vector<std::string> label_variants;  // "A=A| A" entries

    CLI::Option* opt_source = nullptr;
    CLI::Option* opt_toy_table = nullptr;
    CLI::Option* opt_fixtures = nullptr;
    CLI::Option* opt_temperature = nullptr;
    CLI::Option* opt_orderings = nullptr;
    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_template = nullptr;
    CLI::Option* opt_choices = nullptr;
    CLI::Option* opt_out = nullptr;
    CLI::Option* opt_workers = nullptr;
    CLI::Option* opt_shuffles = nullptr;
    CLI::Option* opt_no_record = nullptr;
    CLI::Option* opt_formats = nullptr;
    CLI::Option* opt_abort_fraction = nullptr;
    CLI::Option* opt_label_variants = nullptr;
    CLI::Option* opt_remote_url = nullptr;
    CLI::Option* opt_remote_path = nullptr;
    CLI::Option* opt_remote_model = nullptr;
    CLI::Option* opt_remote_k = nullptr;
    CLI::Option* opt_remote_timeout = nullptr;
    CLI::Option* opt_remote_attempts = nullptr;
    CLI::Option* opt_remote_in_flight = nullptr;

    void add_common(CLI::App& cmd) {
        cmd.add_option("--config", config_path, "JSON config file; CLI flags override it");
        opt_source = cmd.add_option("--source", cli.source, "logit source: toy|replay|remote");
        opt_toy_table = cmd.add_option("--toy-table", cli.toy_table, "toy LM table (JSON)");
        opt_fixtures = cmd.add_option("--fixtures", cli.fixtures, "fixture file for replay");
        opt_seed = cmd.add_option("--seed", cli.seed, "run seed");
        opt_remote_url = cmd.add_option("--remote-url", cli.remote.base_url,
                                        "remote endpoint base URL");
        opt_remote_path = cmd.add_option("--remote-path", cli.remote.path,
                                         "completions path (default /v1/completions)");
        opt_remote_model = cmd.add_option("--remote-model", cli.remote.model, "model name");
        opt_remote_k = cmd.add_option("--top-logprobs", cli.remote.top_logprobs,
                                      "candidates per call (K)");
        opt_remote_timeout = cmd.add_option("--timeout", cli.remote.timeout_seconds,
                                            "per-call deadline in seconds");
        opt_remote_attempts = cmd.add_option("--max-attempts", cli.remote.max_attempts,
                                             "attempts per call incl. retries");
        opt_remote_in_flight = cmd.add_option("--max-in-flight", cli.remote.max_in_flight,
                                              "bound on concurrent remote calls");
    }

    void add_scoring(CLI::App& cmd) {
        opt_temperature = cmd.add_option("--temperature", cli.temperature,
                                         "T for the expected-value score (default 10)");
        opt_orderings = cmd.add_option("--orderings", orderings,
                                       "choice orderings: ascending|reversed|random")
                            ->delimiter(',');
        opt_template = cmd.add_option("--template", cli.template_path, "prompt template file");
        opt_choices = cmd.add_option("--choices", cli.choices_path,
                                     "choice texts file (5 lines, worst->best)");
        opt_out = cmd.add_option("--out", cli.out_dir, "output directory");
        opt_workers = cmd.add_option("--workers", cli.workers, "example-level parallelism");
        opt_shuffles = cmd.add_option("--shuffles", cli.shuffles, "bootstrap shuffles");
        opt_no_record = cmd.add_flag("--no-record", "do not record fetched distributions");
        opt_formats = cmd.add_option("--formats", formats, "report formats: text|json|csv")
                          ->delimiter(',');
        opt_abort_fraction = cmd.add_option("--abort-fail-fraction", cli.abort_fail_fraction,
                                            "abort when more than this fraction of examples "
                                            "fails (default 0.1)");
        opt_label_variants = cmd.add_option(
            "--label-variant", label_variants,
            "accepted token strings for a label, e.g. \"A=A| A\" (repeatable)");
    }

    RunConfig merge() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = RunConfig::from_file(config_path);
        auto take = [](CLI::Option* opt) { return opt && opt->count() > 0; };
        if (take(opt_source)) cfg.source = cli.source;
        if (take(opt_toy_table)) cfg.toy_table = cli.toy_table;
        if (take(opt_fixtures)) cfg.fixtures = cli.fixtures;
        if (take(opt_seed)) cfg.seed = cli.seed;
        if (take(opt_temperature)) cfg.temperature = cli.temperature;
        if (take(opt_orderings)) cfg.orderings = parse_orderings(orderings);
        if (take(opt_template)) cfg.template_path = cli.template_path;
        if (take(opt_choices)) cfg.choices_path = cli.choices_path;
        if (take(opt_out)) cfg.out_dir = cli.out_dir;
        if (take(opt_workers)) cfg.workers = cli.workers;
        if (take(opt_shuffles)) cfg.shuffles = cli.shuffles;
        if (take(opt_no_record)) cfg.record_fixtures = false;
        if (take(opt_formats)) cfg.formats = formats;
        if (take(opt_abort_fraction)) cfg.abort_fail_fraction = cli.abort_fail_fraction;
        if (take(opt_label_variants)) {
            for (const auto& spec : label_variants) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos)
                    throw dscope::InvalidInputError("--label-variant needs LABEL=V1|V2, got '" +
                                                    spec + "'");
                std::vector<std::string> variants;
                std::string rest = spec.substr(eq + 1);
                std::size_t pos = 0;
                while (true) {
                    const auto bar = rest.find('|', pos);
                    variants.push_back(rest.substr(pos, bar - pos));
                    if (bar == std::string::npos) break;
                    pos = bar + 1;
                }
                cfg.label_variants[spec.substr(0, eq)] = std::move(variants);
            }
        }
        if (take(opt_remote_url)) cfg.remote.base_url = cli.remote.base_url;
        if (take(opt_remote_path)) cfg.remote.path = cli.remote.path;
        if (take(opt_remote_model)) cfg.remote.model = cli.remote.model;
        if (take(opt_remote_k)) cfg.remote.top_logprobs = cli.remote.top_logprobs;
        if (take(opt_remote_timeout)) cfg.remote.timeout_seconds = cli.remote.timeout_seconds;
        if (take(opt_remote_attempts)) cfg.remote.max_attempts = cli.remote.max_attempts;
        if (take(opt_remote_in_flight)) cfg.remote.max_in_flight = cli.remote.max_in_flight;
        return cfg;
    }
};

int cmd_score(const ConfigFlags& flags, const std::string& dataset_path) {
    RunConfig cfg = flags.merge();
    const auto dataset = dscope::ingest_dataset(dataset_path);
    const dscope::ScoringOutput output = dscope::run_scoring(cfg, dataset);

    std::filesystem::create_directories(cfg.out_dir);
    write_file(std::filesystem::path(cfg.out_dir) / "results.jsonl",
               dscope::results_to_jsonl(output.results));
    std::vector<dscope::ReportFormat> formats;
    for (const auto& f : cfg.formats) formats.push_back(dscope::report_format_from_string(f));
    dscope::emit_report(output.report, formats, cfg.out_dir);
    if (output.recorded && !output.recorded->empty())
        output.recorded->save(std::filesystem::path(cfg.out_dir) / "fixtures.jsonl");

    for (const auto& failure : output.failures)
        std::cerr << "excluded: " << failure << '\n';
    std::cout << dscope::report_to_text(output.report);
    return 0;
}

int cmd_record_fixtures(const ConfigFlags& flags, const std::string& dataset_path,
                        const std::string& out_file) {
    RunConfig cfg = flags.merge();
    cfg.record_fixtures = true;
    const auto dataset = dscope::ingest_dataset(dataset_path);
    const auto source = dscope::make_source(cfg);
    dscope::McqPromptSpec spec = cfg.template_path.empty()
                                     ? dscope::default_prompt_spec()
                                     : dscope::McqPromptSpec::load(cfg.template_path,
                                                                   cfg.choices_path);
    dscope::FixtureStore store;
    std::size_t failures = 0;
    for (const auto& ex : dataset) {
        const std::uint64_t example_seed = dscope::derive_seed(cfg.seed, ex.id);
        for (const auto& metric : dscope::kMetricNames) {
            for (dscope::ChoiceOrdering ordering : cfg.orderings) {
                const auto rendered = dscope::render_prompt(spec, ex.article, ex.summary,
                                                            metric, ordering, example_seed);
                try {
                    const auto dist = dscope::fetch_distribution(*source, rendered.text);
                    store.record(rendered.text, dist.entries);
                } catch (const std::exception& e) {
                    ++failures;
                    std::cerr << "failed: " << ex.id << " (" << metric << ", "
                              << to_string(ordering) << "): " << e.what() << '\n';
                }
            }
        }
    }
    store.save(out_file);
    std::cout << "recorded " << store.size() << " fixtures to " << out_file;
    if (failures) std::cout << " (" << failures << " fetches failed)";
    std::cout << '\n';
    return failures == 0 ? 0 : 1;
}

int cmd_tree(const ConfigFlags& flags, const std::vector<std::string>& prompt_tokens,
             const std::string& prompt_text, const std::string& json_out,
             const dscope::TreeConfig& tree_cli, const CLI::App& cmd,
             double min_probability) {
    RunConfig cfg = flags.merge();
    auto touched = [&](const char* name) { return cmd.count(name) > 0; };
    if (touched("--top-p")) cfg.tree.top_p = tree_cli.top_p;
    if (touched("--tree-temperature")) cfg.tree.temperature = tree_cli.temperature;
    if (touched("--alpha")) cfg.tree.min_cum_logprob = tree_cli.min_cum_logprob;
    if (touched("--stop")) cfg.tree.stop_tokens = tree_cli.stop_tokens;
    if (touched("--max-steps")) cfg.tree.max_steps = tree_cli.max_steps;
    if (touched("--max-length")) cfg.tree.max_length = tree_cli.max_length;
    if (touched("--renormalize")) cfg.tree.nucleus_renormalize = tree_cli.nucleus_renormalize;
    if (touched("--min-probability")) cfg.tree_min_probability = min_probability;

    std::vector<dscope::Token> prompt = prompt_tokens;
    if (!prompt_text.empty()) prompt.push_back(prompt_text);
    const dscope::TreeRun run = dscope::run_tree(cfg, prompt);
    std::cout << run.table;
    if (!json_out.empty())
        write_file(json_out,
                   dscope::tree_result_to_json(run.result, cfg.tree).dump(2) + "\n");
    return 0;
}

int cmd_stats(const std::string& human_path, const std::string& baseline_path,
              const std::string& method_path, std::optional<double> r1_flag,
              std::optional<double> r2_flag, int shuffles, std::uint64_t seed,
              const std::string& metric, const std::string& mixing,
              const std::string& out_path) {
    const auto human = load_series_file(human_path);
    if (human.size() < 3) throw dscope::InvalidInputError("need at least 3 human values");

    std::vector<std::string> ids;
    Eigen::VectorXd x(static_cast<Eigen::Index>(human.size()));
    Eigen::Index i = 0;
    for (const auto& [id, value] : human) {
        ids.push_back(id);
        x[i++] = value;
    }

    auto series_r = [&](const std::string& path) {
        const auto values = load_series_file(path);
        Eigen::VectorXd y(x.size());
        for (std::size_t j = 0; j < ids.size(); ++j) {
            auto it = values.find(ids[j]);
            if (it == values.end())
                throw dscope::InvalidInputError("series " + path + " is missing id '" +
                                                ids[j] + "'");
            y[static_cast<Eigen::Index>(j)] = it->second;
        }
        return dscope::pearson(x, y);
    };

    const double r1 = r1_flag ? *r1_flag : series_r(baseline_path);
    const double r2 = r2_flag ? *r2_flag : series_r(method_path);
    const auto form = mixing == "literal" ? dscope::MixingForm::scaled_shuffle
                                          : dscope::MixingForm::scaled_base;
    const auto verdict = dscope::significance_test(x, r1, r2, shuffles, seed, form);

    const json row{{"metric", metric},
                   {"r_baseline", verdict.r1},
                   {"r_method", verdict.r2},
                   {"cdf", verdict.cdf_at_r2},
                   {"significant", verdict.significant},
                   {"n", static_cast<int>(x.size())},
                   {"shuffles", verdict.shuffles},
                   {"seed", verdict.seed}};
    const std::string payload = row.dump() + "\n";
    if (out_path.empty())
        std::cout << payload;
    else
        write_file(out_path, payload);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decoding-analysis toolkit: expected-value Likert scoring and "
                 "tree-crawling top-p completion enumeration"};
    app.require_subcommand(1);

    // score
    auto* score = app.add_subcommand("score", "score a dataset and report correlations");
    ConfigFlags score_flags;
    std::string dataset_path;
    score->add_option("--dataset", dataset_path, "dataset JSONL")->required();
    score_flags.add_common(*score);
    score_flags.add_scoring(*score);

    // tree
    auto* tree = app.add_subcommand("tree", "enumerate probable completions for a prompt");
    ConfigFlags tree_flags;
    tree_flags.add_common(*tree);
    std::vector<std::string> prompt_tokens;
    std::string prompt_text, tree_json_out;
    dscope::TreeConfig tree_cli;
    double tree_min_probability = 0.001;
    tree->add_option("--prompt-token", prompt_tokens,
                     "prompt token (repeatable, kept in order)");
    tree->add_option("--prompt", prompt_text, "prompt text (appended as one opaque token)");
    tree->add_option("--top-p", tree_cli.top_p, "nucleus threshold p (default 0.9)");
    tree->add_option("--tree-temperature", tree_cli.temperature,
                     "softmax temperature for expansion");
    tree->add_option("--alpha", tree_cli.min_cum_logprob,
                     "minimum cumulative log-likelihood (default -inf)");
    tree->add_option("--stop", tree_cli.stop_tokens, "stop token (repeatable)");
    tree->add_option("--max-steps", tree_cli.max_steps, "max source evaluations");
    tree->add_option("--max-length", tree_cli.max_length, "max extension length");
    tree->add_flag("--renormalize", tree_cli.nucleus_renormalize,
                   "renormalize within the nucleus");
    tree->add_option("--min-probability", tree_min_probability,
                     "report rows with probability >= this (default 0.001)");
    tree->add_option("--json-out", tree_json_out, "write the full result JSON here");

    // stats
    auto* stats = app.add_subcommand("stats", "bootstrap significance of r1 vs r2");
    std::string human_path, baseline_path, method_path, stats_metric = "metric",
                            stats_mixing = "corrected", stats_out;
    std::optional<double> r1_flag, r2_flag;
    int stats_shuffles = 10000;
    std::uint64_t stats_seed = 0;
    stats->add_option("--human", human_path, "human series JSONL {id, value}")->required();
    stats->add_option("--baseline", baseline_path, "baseline score series JSONL");
    stats->add_option("--method", method_path, "method score series JSONL");
    stats->add_option("--r1", r1_flag, "baseline correlation (instead of --baseline)");
    stats->add_option("--r2", r2_flag, "method correlation (instead of --method)");
    stats->add_option("--shuffles", stats_shuffles, "bootstrap shuffles (default 10000)");
    stats->add_option("--seed", stats_seed, "RNG seed");
    stats->add_option("--metric", stats_metric, "metric name for the report row");
    stats->add_option("--mixing", stats_mixing, "corrected|literal mixing form");
    stats->add_option("--out", stats_out, "write the JSON row here instead of stdout");

    // convert-dataset
    auto* convert = app.add_subcommand("convert-dataset",
                                       "convert the SummEval release layout to dataset JSONL");
    std::string convert_in, convert_out;
    convert->add_option("--input", convert_in, "SummEval paired JSONL")->required();
    convert->add_option("--output", convert_out, "neutral dataset JSONL")->required();

    // record-fixtures
    auto* record = app.add_subcommand("record-fixtures",
                                      "fetch and record distributions for replay");
    ConfigFlags record_flags;
    std::string record_dataset, record_out = "fixtures.jsonl";
    record->add_option("--dataset", record_dataset, "dataset JSONL")->required();
    record->add_option("--out-file", record_out, "fixture JSONL to write");
    record_flags.add_common(*record);
    record_flags.add_scoring(*record);

    CLI11_PARSE(app, argc, argv);

    try {
        if (score->parsed()) return cmd_score(score_flags, dataset_path);
        if (tree->parsed())
            return cmd_tree(tree_flags, prompt_tokens, prompt_text, tree_json_out, tree_cli,
                            *tree, tree_min_probability);
        if (stats->parsed())
            return cmd_stats(human_path, baseline_path, method_path, r1_flag, r2_flag,
                             stats_shuffles, stats_seed, stats_metric, stats_mixing,
                             stats_out);
        if (convert->parsed()) {
            const auto examples = dscope::convert_summeval(convert_in);
            dscope::write_dataset(convert_out, examples);
            std::cout << "wrote " << examples.size() << " examples to " << convert_out << '\n';
            return 0;
        }
        if (record->parsed())
            return cmd_record_fixtures(record_flags, record_dataset, record_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
