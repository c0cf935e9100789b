#include "genefilter/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <ostream>

#include "CLI11.hpp"
#include "genefilter/crossval.hpp"
#include "genefilter/dataio.hpp"
#include "genefilter/fgf.hpp"
#include "genefilter/gaopt.hpp"
#include "genefilter/rankers.hpp"
#include "genefilter/report.hpp"
#include "genefilter/textio.hpp"
#include "json.hpp"

namespace genefilter::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string matrix;
    std::string labels;
    std::string out;
    std::uint64_t seed = 42;
    std::vector<std::string> methods;
    std::vector<std::string> classifiers;
    std::string params;
    Index k_max = crossval::kDefaultKMax;
    std::string rank_scope = "train";
    bool reoptimize_fgf = false;
    std::string reference = "median";
    bool standardize = false;
    std::vector<std::string> inputs;
    gaopt::GaConfig ga;
};

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

void add_data_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--matrix", cfg.matrix, "Expression TSV (genes x samples)")->required()->check(CLI::ExistingFile);
    sub->add_option("--labels", cfg.labels, "Labels TSV (sample_id, class_name)")->required()->check(CLI::ExistingFile);
}

void add_ga_options(CLI::App* sub, gaopt::GaConfig& ga) {
    sub->add_option("--population", ga.population_size, "GA population size")->capture_default_str();
    sub->add_option("--generations", ga.generations, "GA generations")->capture_default_str();
    sub->add_option("--tournament", ga.tournament_size, "Tournament size")->capture_default_str();
    sub->add_option("--crossover-rate", ga.crossover_rate, "Uniform crossover probability")->capture_default_str();
    sub->add_option("--mutation-sigma", ga.mutation_sigma, "Gaussian mutation standard deviation")->capture_default_str();
    sub->add_option("--mutation-rate", ga.mutation_rate, "Per-gene mutation probability")->capture_default_str();
    sub->add_option("--elites", ga.elites, "Chromosomes copied unchanged each generation")->capture_default_str();
    sub->add_option("--top-n", ga.top_n_genes, "Genes in the separability subspace")->capture_default_str();
}

Dataset load(const RunConfig& cfg) {
    return dataio::load_dataset(cfg.matrix, cfg.labels);
}

fgf::FgfParams load_params(const RunConfig& cfg, const char* command) {
    fs::path path = cfg.params;
    if (path.empty()) {
        path = fs::path(cfg.out) / "fgf_params.json";
        if (!fs::exists(path))
            throw UsageError(std::string(command) +
                             " --method fgf needs --params or an optimize-fgf artifact (fgf_params.json) in --out");
    }
    return fgf::parse_params_json(textio::read_file(path));
}

std::vector<SweepResult> collect_sweeps(const RunConfig& cfg) {
    std::vector<fs::path> files;
    if (!cfg.inputs.empty()) {
        for (const auto& f : cfg.inputs) files.emplace_back(f);
    } else {
        for (const auto& entry : fs::directory_iterator(cfg.out)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.starts_with("sweep_") && name.ends_with(".json")) files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    }
    if (files.empty()) throw UsageError("no sweep_*.json results found; run evaluate first");
    std::vector<SweepResult> results;
    for (const auto& f : files) results.push_back(crossval::parse_sweep_json(textio::read_file(f)));
    return results;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const std::vector<std::string>& args,
                    const CLI::App* sub, const RunConfig& cfg) {
    const fs::path path = out_dir / "manifest.json";
    nlohmann::ordered_json manifest;
    if (fs::exists(path)) {
        try {
            manifest = nlohmann::ordered_json::parse(textio::read_file(path));
        } catch (const nlohmann::json::exception&) {
            manifest = nlohmann::ordered_json::object();
        }
    }
    manifest["tool"] = "genefilter";
    manifest["version"] = kToolVersion;

    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_name() == "--help") continue;
        const auto& values = opt->results();
        if (!values.empty()) {
            config[opt->get_name()] = values.size() == 1 ? nlohmann::ordered_json(values.front()) : nlohmann::ordered_json(values);
        } else if (!opt->get_default_str().empty()) {
            config[opt->get_name()] = opt->get_default_str();
        }
    }
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    if (!cfg.matrix.empty()) inputs["matrix"] = cfg.matrix;
    if (!cfg.labels.empty()) inputs["labels"] = cfg.labels;
    if (!cfg.params.empty()) inputs["params"] = cfg.params;
    if (!cfg.inputs.empty()) inputs["sweeps"] = cfg.inputs;

    nlohmann::ordered_json run;
    run["argv"] = args;
    run["inputs"] = inputs;
    run["config"] = config;
    run["seed"] = cfg.seed;
    run["timestamp"] = utc_timestamp();
    manifest["runs"][command] = run;
    textio::write_file_atomic(path, manifest.dump(2) + "\n");
}

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
    const Dataset dataset = load(cfg);
    const fs::path dir = cfg.out;
    dataio::save_dataset(dataset, dir / "dataset_matrix.tsv", dir / "dataset_labels.tsv");
    nlohmann::ordered_json summary;
    summary["genes"] = dataset.gene_count();
    summary["samples"] = dataset.sample_count();
    summary["class_names"] = dataset.class_names;
    summary["class_sizes"] = {dataset.class_size(0), dataset.class_size(1)};
    textio::write_file_atomic(dir / "ingest.json", summary.dump(2) + "\n");
    out << "ingested " << dataset.gene_count() << " genes x " << dataset.sample_count() << " samples ("
        << dataset.class_names[0] << ": " << dataset.class_size(0) << ", " << dataset.class_names[1] << ": "
        << dataset.class_size(1) << ")\n";
}

void cmd_normalize(const RunConfig& cfg, std::ostream& out) {
    Dataset dataset = load(cfg);
    dataset.matrix = dataio::quantile_normalize(dataset.matrix, cfg.reference == "median");
    if (cfg.standardize) dataset.matrix = dataio::standardize_genes(dataset.matrix);
    const fs::path dir = cfg.out;
    dataio::save_dataset(dataset, dir / "normalized_matrix.tsv", dir / "normalized_labels.tsv");
    out << "wrote " << (dir / "normalized_matrix.tsv").string() << "\n";
}

void cmd_rank(const RunConfig& cfg, std::ostream& out) {
    const auto method = parse_ranking_method(cfg.methods.front());
    const Dataset dataset = load(cfg);
    const GeneRanking ranking =
        *method == RankingMethod::fgf ? fgf::fgf_rank(dataset, load_params(cfg, "rank")) : rankers::rank_genes(dataset, *method);
    const fs::path file = fs::path(cfg.out) / ("ranking_" + std::string(to_string(*method)) + ".tsv");
    textio::write_file_atomic(file, rankers::format_ranking_tsv(ranking, dataset));
    out << "wrote " << file.string() << " (" << ranking.order.size() << " genes)\n";
}

void cmd_optimize(const RunConfig& cfg, std::ostream& out) {
    const Dataset dataset = load(cfg);
    gaopt::GaConfig ga = cfg.ga;
    ga.seed = cfg.seed;
    const gaopt::GaResult result = gaopt::optimize_fgf(dataset, ga);
    const fs::path dir = cfg.out;
    textio::write_file_atomic(dir / "fgf_params.json", fgf::format_params_json(result.params));
    textio::write_file_atomic(dir / "ga_trace.tsv", gaopt::format_trace_tsv(result.trace));
    out << "best separability index " << textio::format_double(result.trace.best_fitness.back()) << "\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
    std::vector<RankingMethod> methods;
    for (const auto& m : cfg.methods) methods.push_back(*parse_ranking_method(m));
    std::vector<ClassifierKind> kinds;
    for (const auto& c : cfg.classifiers) kinds.push_back(*parse_classifier(c));

    crossval::LoocvOptions options;
    options.rank_scope = *parse_rank_scope(cfg.rank_scope);
    options.seed = cfg.seed;
    options.reoptimize_fgf = cfg.reoptimize_fgf;
    options.ga_config = cfg.ga;
    if (std::find(methods.begin(), methods.end(), RankingMethod::fgf) != methods.end() && !cfg.reoptimize_fgf) {
        options.fgf_params = load_params(cfg, "evaluate");
    }

    const Dataset dataset = load(cfg);
    const Index k_max = std::min(cfg.k_max, dataset.gene_count());
    const fs::path dir = cfg.out;
    for (RankingMethod m : methods) {
        for (ClassifierKind c : kinds) {
            const SweepResult result = crossval::sweep_gene_counts(dataset, m, c, k_max, options);
            const std::string stem = "sweep_" + std::string(to_string(m)) + "_" + std::string(to_string(c));
            textio::write_file_atomic(dir / (stem + ".tsv"), crossval::format_sweep_tsv(result));
            textio::write_file_atomic(dir / (stem + ".json"), crossval::format_sweep_json(result));
            out << to_string(m) << "/" << to_string(c) << ": "
                << report::format_accuracy_cell(result.best_accuracy, result.best_k) << "\n";
        }
    }
}

void cmd_compare(const RunConfig& cfg, std::ostream& out) {
    const auto results = collect_sweeps(cfg);
    const AnovaResult anova = crossval::anova_oneway(report::accuracy_groups(results));
    textio::write_file_atomic(fs::path(cfg.out) / "anova.json", crossval::format_anova_json(anova));
    out << "F(" << anova.df_between << ", " << anova.df_within << ") = " << textio::format_double(anova.F)
        << ", p = " << textio::format_double(anova.p) << "\n";
}

void cmd_report(const RunConfig& cfg, std::ostream& out) {
    const auto results = collect_sweeps(cfg);
    std::optional<AnovaResult> anova;
    const auto groups = report::accuracy_groups(results);
    const bool testable =
        groups.size() >= 2 && std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() >= 2; });
    if (testable) {
        try {
            anova = crossval::anova_oneway(groups);
        } catch (const InvalidInput&) {
            anova.reset();
        }
    }
    report::emit_report(results, anova, cfg.out);
    out << "wrote summary.tsv, boxplot_data.tsv" << (anova ? ", anova.json" : "") << " to " << cfg.out << "\n";
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gene ranking (fuzzy gene filter, t-test, Wilcoxon, ROC) and classifier benchmarking", "genefilter"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    RunConfig cfg;
    const std::vector<std::string> method_names{"fgf", "ttest", "wilcoxon", "roc"};
    const std::vector<std::string> classifier_names{"knn", "svm", "nbc", "mlp"};

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "Output directory")->required();
        sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    };

    CLI::App* ingest = app.add_subcommand("ingest", "Validate and re-serialize a dataset");
    add_data_options(ingest, cfg);
    add_common(ingest);

    CLI::App* normalize = app.add_subcommand("normalize", "Quantile-normalize samples");
    add_data_options(normalize, cfg);
    add_common(normalize);
    normalize->add_option("--reference", cfg.reference, "Rank-wise reference: median or mean")
        ->check(CLI::IsMember({"median", "mean"}))
        ->capture_default_str();
    normalize->add_flag("--standardize", cfg.standardize, "Also z-score each gene");

    CLI::App* rank = app.add_subcommand("rank", "Rank genes by differential expression");
    add_data_options(rank, cfg);
    add_common(rank);
    rank->add_option("--method", cfg.methods, "fgf | ttest | wilcoxon | roc")
        ->required()
        ->expected(1)
        ->check(CLI::IsMember(method_names));
    rank->add_option("--params", cfg.params, "FgfParams JSON (method fgf)");

    CLI::App* optimize = app.add_subcommand("optimize-fgf", "Tune fuzzy regions with the genetic algorithm");
    add_data_options(optimize, cfg);
    add_common(optimize);
    add_ga_options(optimize, cfg.ga);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Nested LOOCV sweep over top-k gene counts");
    add_data_options(evaluate, cfg);
    add_common(evaluate);
    evaluate->add_option("--method", cfg.methods, "Ranking methods (comma separated)")
        ->required()
        ->delimiter(',')
        ->check(CLI::IsMember(method_names));
    evaluate->add_option("--classifier", cfg.classifiers, "Classifiers (comma separated)")
        ->required()
        ->delimiter(',')
        ->check(CLI::IsMember(classifier_names));
    evaluate->add_option("--k-max", cfg.k_max, "Largest gene count in the sweep")->capture_default_str()->check(CLI::PositiveNumber);
    evaluate->add_option("--rank-scope", cfg.rank_scope, "Rank inside each outer fold (train) or once (full)")
        ->check(CLI::IsMember({"train", "full"}))
        ->capture_default_str();
    evaluate->add_option("--params", cfg.params, "FgfParams JSON (method fgf)");
    evaluate->add_flag("--reoptimize-fgf", cfg.reoptimize_fgf, "Re-run the GA inside every outer fold");
    add_ga_options(evaluate, cfg.ga);

    CLI::App* compare = app.add_subcommand("compare", "One-way ANOVA of best accuracies across ranking methods");
    add_common(compare);
    compare->add_option("--inputs", cfg.inputs, "Sweep JSON files (default: sweep_*.json in --out)");

    CLI::App* report_cmd = app.add_subcommand("report", "Write summary and plot-data tables");
    add_common(report_cmd);
    report_cmd->add_option("--inputs", cfg.inputs, "Sweep JSON files (default: sweep_*.json in --out)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto selected = app.get_subcommands();
        err << (selected.empty() ? app.help() : selected.front()->help());
        return 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    const std::map<std::string, std::function<void(const RunConfig&, std::ostream&)>> handlers{
        {"ingest", cmd_ingest},   {"normalize", cmd_normalize}, {"rank", cmd_rank},     {"optimize-fgf", cmd_optimize},
        {"evaluate", cmd_evaluate}, {"compare", cmd_compare},   {"report", cmd_report},
    };
    try {
        fs::create_directories(cfg.out);
        handlers.at(command)(cfg, out);
        write_manifest(cfg.out, command, args, sub, cfg);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << sub->help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace genefilter::cli
