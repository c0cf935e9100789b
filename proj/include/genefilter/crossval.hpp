#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "genefilter/classifiers.hpp"
#include "genefilter/fgf.hpp"
#include "genefilter/gaopt.hpp"

namespace genefilter {

enum class ClassifierKind { knn, svm, nbc, mlp };

std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier(std::string_view name);

// Where gene ranking happens relative to the outer leave-one-out loop.
enum class RankScope { train, full };

std::string_view to_string(RankScope scope);
std::optional<RankScope> parse_rank_scope(std::string_view name);

// A classifier fitted on z-scored features, with the training statistics
// kept for scaling queries.
struct TrainedModel {
    ClassifierKind kind = ClassifierKind::knn;
    double hyperparameter = 0.0;
    Vector feature_mean;
    Vector feature_scale;
    std::variant<classifiers::TrainSet, classifiers::SvmModel, classifiers::NbcModel, classifiers::MlpModel> model;
};

struct SweepResult {
    RankingMethod method = RankingMethod::ttest;
    ClassifierKind classifier = ClassifierKind::knn;
    std::vector<double> accuracy_by_k;  // entry k-1 holds the accuracy with the top k genes
    Index best_k = 0;
    double best_accuracy = 0.0;
};

struct AnovaResult {
    double F = 0.0;
    double p = 1.0;
    int df_between = 0;
    int df_within = 0;
};

namespace crossval {

inline constexpr int kInnerFolds = 10;
inline constexpr Index kDefaultKMax = 50;

// Hyperparameter grid, ordered from the simplest model to the most complex;
// `feature_count` sizes the MLP hidden-node grid.
std::vector<double> hyperparameter_grid(ClassifierKind kind, Index feature_count);

// Fold index per sample. Within each class samples are shuffled and dealt
// round-robin; dealing continues across classes so overall fold sizes stay balanced.
std::vector<int> stratified_folds(std::span<const int> labels, int n_folds, std::uint64_t seed);

TrainedModel train_classifier(ClassifierKind kind, const classifiers::TrainSet& train, double hyperparameter,
                              std::uint64_t seed);
int predict(const TrainedModel& model, std::span<const double> query);

// Best grid value by stratified inner cross-validation; ties go to the
// simpler model.
double inner_search(const classifiers::TrainSet& train, ClassifierKind kind, std::uint64_t seed);

struct LoocvOptions {
    RankScope rank_scope = RankScope::train;
    // Required for RankingMethod::fgf unless reoptimize_fgf is set.
    std::optional<fgf::FgfParams> fgf_params;
    // Re-run the GA on every outer training set instead of using fgf_params.
    bool reoptimize_fgf = false;
    gaopt::GaConfig ga_config;
    std::uint64_t seed = 42;
};

// Training set restricted to `genes`, samples in the given column order.
classifiers::TrainSet make_train_set(const Dataset& dataset, std::span<const Index> genes,
                                     std::span<const Index> samples);

// Entry s holds the `k_max` best genes (ranking order) used when sample s is
// held out: ranked without s for RankScope::train, on all samples for full.
std::vector<std::vector<Index>> training_gene_lists(const Dataset& dataset, RankingMethod method, Index k_max,
                                                    const LoocvOptions& options);

double loocv_accuracy(const Dataset& dataset, RankingMethod method, ClassifierKind classifier, Index k_genes,
                      const LoocvOptions& options);

// Best k is the smallest k attaining the maximum accuracy.
SweepResult make_sweep_result(RankingMethod method, ClassifierKind classifier, std::vector<double> accuracy_by_k);

SweepResult sweep_gene_counts(const Dataset& dataset, RankingMethod method, ClassifierKind classifier, Index k_max,
                              const LoocvOptions& options);

std::string format_sweep_tsv(const SweepResult& result);
std::string format_sweep_json(const SweepResult& result);
SweepResult parse_sweep_json(const std::string& text);

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);
std::string format_anova_json(const AnovaResult& result);

} // namespace crossval
} // namespace genefilter
