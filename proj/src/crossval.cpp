#include "genefilter/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "genefilter/special_functions.hpp"
#include "genefilter/textio.hpp"
#include "json.hpp"

namespace genefilter {

std::string_view to_string(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::nbc: return "nbc";
    case ClassifierKind::mlp: return "mlp";
    }
    return "unknown";
}

std::optional<ClassifierKind> parse_classifier(std::string_view name) {
    for (ClassifierKind k : {ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::nbc, ClassifierKind::mlp}) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

std::string_view to_string(RankScope scope) {
    return scope == RankScope::train ? "train" : "full";
}

std::optional<RankScope> parse_rank_scope(std::string_view name) {
    if (name == "train") return RankScope::train;
    if (name == "full") return RankScope::full;
    return std::nullopt;
}

namespace crossval {

using classifiers::TrainSet;

namespace {

std::vector<Index> all_except(Index n, Index skip) {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(n - 1));
    for (Index i = 0; i < n; ++i) {
        if (i != skip) out.push_back(i);
    }
    return out;
}

TrainSet subset(const TrainSet& train, const std::vector<Index>& rows) {
    TrainSet out;
    out.features.resize(static_cast<Index>(rows.size()), train.feature_count());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.features.row(static_cast<Index>(r)) = train.features.row(rows[r]);
        out.labels.push_back(train.labels[static_cast<std::size_t>(rows[r])]);
    }
    return out;
}

bool grid_value_usable(ClassifierKind kind, double value, Index train_size) {
    return kind != ClassifierKind::knn || static_cast<Index>(value) <= train_size;
}

// Genes ranked on the outer training set for held-out sample `s`, in ranking order.
GeneRanking outer_ranking(const Dataset& dataset, RankingMethod method, Index held_out, const LoocvOptions& options) {
    const Dataset train = held_out < 0 ? dataset : dataset.select_samples(all_except(dataset.sample_count(), held_out));
    if (method != RankingMethod::fgf) return rankers::rank_genes(train, method);
    if (options.reoptimize_fgf) {
        gaopt::GaConfig config = options.ga_config;
        config.seed = mix_seed(options.seed, static_cast<std::uint64_t>(held_out + 1));
        return fgf::fgf_rank(train, gaopt::optimize_fgf(train, config).params);
    }
    return fgf::fgf_rank(train, *options.fgf_params);
}

void check_options(const Dataset& dataset, RankingMethod method, const LoocvOptions& options) {
    dataset.validate();
    if (method == RankingMethod::fgf && !options.fgf_params && !options.reoptimize_fgf)
        throw InvalidInput("loocv: fuzzy gene filter ranking needs FgfParams (or reoptimize_fgf)");
    if (options.fgf_params) options.fgf_params->validate();
}

double loocv_from_gene_lists(const Dataset& dataset, ClassifierKind classifier, Index k_genes,
                             const std::vector<std::vector<Index>>& gene_lists, std::uint64_t seed) {
    const Index n = dataset.sample_count();
    Index correct = 0;
    for (Index s = 0; s < n; ++s) {
        const auto& ranked = gene_lists[static_cast<std::size_t>(s)];
        std::vector<Index> genes(ranked.begin(), ranked.begin() + k_genes);
        std::sort(genes.begin(), genes.end());
        const std::vector<Index> train_samples = all_except(n, s);
        const TrainSet train = make_train_set(dataset, genes, train_samples);

        const std::uint64_t fold_seed = mix_seed(mix_seed(seed, static_cast<std::uint64_t>(s)), static_cast<std::uint64_t>(k_genes));
        const double hyper = inner_search(train, classifier, fold_seed);
        const TrainedModel model = train_classifier(classifier, train, hyper, mix_seed(fold_seed, 0xF17ULL));

        std::vector<double> query(genes.size());
        for (std::size_t f = 0; f < genes.size(); ++f) query[f] = dataset.matrix(genes[f], s);
        if (predict(model, query) == dataset.labels[static_cast<std::size_t>(s)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n);
}

} // namespace

std::vector<double> hyperparameter_grid(ClassifierKind kind, Index feature_count) {
    switch (kind) {
    case ClassifierKind::knn: return {1, 3, 5, 7, 9};
    case ClassifierKind::svm: return {0.01, 0.1, 1, 10, 100};
    case ClassifierKind::nbc: return {1, 0.5, 0.25, 2, 4};
    case ClassifierKind::mlp: {
        const Index d = std::max<Index>(feature_count, 1);
        std::vector<double> grid;
        for (Index h : {Index{1}, (d + 1) / 2, d, 2 * d}) {
            if (grid.empty() || static_cast<double>(h) > grid.back()) grid.push_back(static_cast<double>(h));
        }
        return grid;
    }
    }
    return {};
}

std::vector<int> stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw InvalidInput("stratified_folds: need at least 2 folds");
    std::mt19937_64 rng(seed);
    std::vector<int> fold(labels.size(), -1);
    int next = 0;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(i);
        }
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t i : members) {
            fold[i] = next;
            next = (next + 1) % n_folds;
        }
    }
    for (int f : fold) {
        if (f < 0) throw InvalidInput("stratified_folds: labels must be 0 or 1");
    }
    return fold;
}

TrainedModel train_classifier(ClassifierKind kind, const TrainSet& train, double hyperparameter, std::uint64_t seed) {
    train.validate();
    TrainedModel out;
    out.kind = kind;
    out.hyperparameter = hyperparameter;
    const Index n = train.sample_count();
    out.feature_mean = train.features.colwise().mean().transpose();
    out.feature_scale.resize(train.feature_count());
    for (Index f = 0; f < train.feature_count(); ++f) {
        const double var =
            n > 1 ? (train.features.col(f).array() - out.feature_mean(f)).square().sum() / static_cast<double>(n - 1) : 0.0;
        out.feature_scale(f) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    TrainSet scaled;
    scaled.labels = train.labels;
    scaled.features = (train.features.rowwise() - out.feature_mean.transpose()).array().rowwise() /
                      out.feature_scale.transpose().array();

    switch (kind) {
    case ClassifierKind::knn: out.model = std::move(scaled); break;
    case ClassifierKind::svm: out.model = classifiers::svm_train(scaled, hyperparameter); break;
    case ClassifierKind::nbc: out.model = classifiers::nbc_train(scaled, hyperparameter); break;
    case ClassifierKind::mlp:
        out.model = classifiers::mlp_train(scaled, static_cast<int>(hyperparameter), classifiers::kMlpDefaultLambda, seed);
        break;
    }
    return out;
}

int predict(const TrainedModel& model, std::span<const double> query) {
    if (static_cast<Index>(query.size()) != model.feature_mean.size()) throw InvalidInput("predict: query length mismatch");
    std::vector<double> scaled(query.size());
    for (std::size_t f = 0; f < query.size(); ++f) {
        scaled[f] = (query[f] - model.feature_mean(static_cast<Index>(f))) / model.feature_scale(static_cast<Index>(f));
    }
    switch (model.kind) {
    case ClassifierKind::knn:
        return classifiers::knn_classify(std::get<TrainSet>(model.model), scaled, static_cast<int>(model.hyperparameter));
    case ClassifierKind::svm: return classifiers::svm_predict(std::get<classifiers::SvmModel>(model.model), scaled);
    case ClassifierKind::nbc: return classifiers::nbc_predict(std::get<classifiers::NbcModel>(model.model), scaled).label;
    case ClassifierKind::mlp: return classifiers::mlp_predict(std::get<classifiers::MlpModel>(model.model), scaled).label;
    }
    return 0;
}

double inner_search(const TrainSet& train, ClassifierKind kind, std::uint64_t seed) {
    train.validate();
    const std::vector<double> grid = hyperparameter_grid(kind, train.feature_count());
    const Index smallest_class =
        std::min(static_cast<Index>(std::count(train.labels.begin(), train.labels.end(), 0)),
                 static_cast<Index>(std::count(train.labels.begin(), train.labels.end(), 1)));
    const int n_folds = static_cast<int>(std::min<Index>(kInnerFolds, smallest_class));
    // A class with a single member cannot appear on both sides of a split.
    if (n_folds < 2) return grid.front();

    const std::vector<int> folds = stratified_folds(train.labels, n_folds, seed);
    std::vector<Index> correct(grid.size(), 0);
    std::vector<bool> usable(grid.size(), true);
    for (int f = 0; f < n_folds; ++f) {
        std::vector<Index> fit_rows;
        std::vector<Index> test_rows;
        for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? test_rows : fit_rows).push_back(static_cast<Index>(i));
        const TrainSet fit = subset(train, fit_rows);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            if (!usable[g]) continue;
            if (!grid_value_usable(kind, grid[g], fit.sample_count())) {
                usable[g] = false;
                continue;
            }
            TrainedModel model;
            try {
                model = train_classifier(kind, fit, grid[g], mix_seed(seed, static_cast<std::uint64_t>(f)));
            } catch (const classifiers::SvmConvergenceError&) {
                usable[g] = false;
                continue;
            }
            for (Index row : test_rows) {
                const Vector q = train.features.row(row).transpose();
                if (predict(model, std::span<const double>(q.data(), static_cast<std::size_t>(q.size()))) ==
                    train.labels[static_cast<std::size_t>(row)])
                    ++correct[g];
            }
        }
    }

    std::size_t best = grid.size();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (usable[g] && (best == grid.size() || correct[g] > correct[best])) best = g;
    }
    return best == grid.size() ? grid.front() : grid[best];
}

std::vector<std::vector<Index>> training_gene_lists(const Dataset& dataset, RankingMethod method, Index k_max,
                                                const LoocvOptions& options) {
    const Index n = dataset.sample_count();
    std::vector<std::vector<Index>> lists(static_cast<std::size_t>(n));
    if (options.rank_scope == RankScope::full) {
        const std::vector<Index> top = outer_ranking(dataset, method, -1, options).top(k_max);
        std::fill(lists.begin(), lists.end(), top);
        return lists;
    }
    for (Index s = 0; s < n; ++s) lists[static_cast<std::size_t>(s)] = outer_ranking(dataset, method, s, options).top(k_max);
    return lists;
}

TrainSet make_train_set(const Dataset& dataset, std::span<const Index> genes, std::span<const Index> samples) {
    TrainSet train;
    train.features.resize(static_cast<Index>(samples.size()), static_cast<Index>(genes.size()));
    train.labels.reserve(samples.size());
    for (std::size_t r = 0; r < samples.size(); ++r) {
        for (std::size_t f = 0; f < genes.size(); ++f) {
            train.features(static_cast<Index>(r), static_cast<Index>(f)) = dataset.matrix(genes[f], samples[r]);
        }
        train.labels.push_back(dataset.labels[static_cast<std::size_t>(samples[r])]);
    }
    return train;
}

double loocv_accuracy(const Dataset& dataset, RankingMethod method, ClassifierKind classifier, Index k_genes,
                      const LoocvOptions& options) {
    check_options(dataset, method, options);
    if (k_genes < 1 || k_genes > dataset.gene_count())
        throw InvalidInput("loocv_accuracy: k_genes " + std::to_string(k_genes) + " outside [1, " +
                           std::to_string(dataset.gene_count()) + "]");
    const auto lists = training_gene_lists(dataset, method, k_genes, options);
    return loocv_from_gene_lists(dataset, classifier, k_genes, lists, options.seed);
}

SweepResult make_sweep_result(RankingMethod method, ClassifierKind classifier, std::vector<double> accuracy_by_k) {
    if (accuracy_by_k.empty()) throw InvalidInput("make_sweep_result: no accuracies");
    SweepResult result;
    result.method = method;
    result.classifier = classifier;
    const auto best = std::max_element(accuracy_by_k.begin(), accuracy_by_k.end());
    result.best_k = static_cast<Index>(best - accuracy_by_k.begin()) + 1;
    result.best_accuracy = *best;
    result.accuracy_by_k = std::move(accuracy_by_k);
    return result;
}

SweepResult sweep_gene_counts(const Dataset& dataset, RankingMethod method, ClassifierKind classifier, Index k_max,
                              const LoocvOptions& options) {
    check_options(dataset, method, options);
    if (k_max < 1 || k_max > dataset.gene_count())
        throw InvalidInput("sweep_gene_counts: k_max " + std::to_string(k_max) + " outside [1, " +
                           std::to_string(dataset.gene_count()) + "]");
    const auto lists = training_gene_lists(dataset, method, k_max, options);
    std::vector<double> accuracy(static_cast<std::size_t>(k_max));
    for (Index k = 1; k <= k_max; ++k) {
        accuracy[static_cast<std::size_t>(k - 1)] = loocv_from_gene_lists(dataset, classifier, k, lists, options.seed);
    }
    return make_sweep_result(method, classifier, std::move(accuracy));
}

std::string format_sweep_tsv(const SweepResult& result) {
    std::string out = "k\taccuracy\n";
    for (std::size_t i = 0; i < result.accuracy_by_k.size(); ++i) {
        out += std::to_string(i + 1);
        out += '\t';
        out += textio::format_double(result.accuracy_by_k[i]);
        out += '\n';
    }
    return out;
}

std::string format_sweep_json(const SweepResult& result) {
    nlohmann::ordered_json json;
    json["method"] = std::string(to_string(result.method));
    json["classifier"] = std::string(to_string(result.classifier));
    json["best_k"] = result.best_k;
    json["best_accuracy"] = result.best_accuracy;
    json["accuracy_by_k"] = result.accuracy_by_k;
    return json.dump(2) + "\n";
}

SweepResult parse_sweep_json(const std::string& text) {
    try {
        const auto json = nlohmann::json::parse(text);
        const auto method = parse_ranking_method(json.at("method").get<std::string>());
        const auto classifier = parse_classifier(json.at("classifier").get<std::string>());
        if (!method || !classifier) throw InvalidInput("sweep json: unknown method or classifier");
        if (json.contains("accuracy_by_k")) {
            return make_sweep_result(*method, *classifier, json.at("accuracy_by_k").get<std::vector<double>>());
        }
        SweepResult result;
        result.method = *method;
        result.classifier = *classifier;
        result.best_k = json.at("best_k").get<Index>();
        result.best_accuracy = json.at("best_accuracy").get<double>();
        return result;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("sweep json: ") + e.what());
    }
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw InvalidInput("anova_oneway: need at least 2 groups");
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw InvalidInput("anova_oneway: every group needs at least 2 observations");
        for (double v : g) {
            if (!std::isfinite(v)) throw InvalidInput("anova_oneway: non-finite observation");
            total += v;
        }
        count += g.size();
    }
    const double grand = total / static_cast<double>(count);
    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        ss_between += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
        for (double v : g) ss_within += (v - mean) * (v - mean);
    }
    if (ss_between == 0.0 && ss_within == 0.0) throw InvalidInput("anova_oneway: degenerate ANOVA (all values identical)");

    AnovaResult result;
    result.df_between = static_cast<int>(groups.size()) - 1;
    result.df_within = static_cast<int>(count - groups.size());
    if (ss_within == 0.0) {
        result.F = std::numeric_limits<double>::infinity();
        result.p = 0.0;
        return result;
    }
    result.F = (ss_between / result.df_between) / (ss_within / result.df_within);
    result.p = stats::f_upper_tail(result.F, result.df_between, result.df_within);
    return result;
}

std::string format_anova_json(const AnovaResult& result) {
    nlohmann::ordered_json json;
    json["F"] = std::isfinite(result.F) ? nlohmann::ordered_json(result.F) : nlohmann::ordered_json("inf");
    json["p"] = result.p;
    json["df_between"] = result.df_between;
    json["df_within"] = result.df_within;
    return json.dump(2) + "\n";
}

} // namespace crossval
} // namespace genefilter
