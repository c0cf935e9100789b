#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genefilter/common.hpp"

namespace genefilter::classifiers {

// Samples in rows, selected genes in columns; labels in {0, 1}.
struct TrainSet {
    Matrix features;
    std::vector<int> labels;

    Index sample_count() const { return features.rows(); }
    Index feature_count() const { return features.cols(); }
    void validate() const;
};

// ---------------------------------------------------------------------------
// K nearest neighbours
// ---------------------------------------------------------------------------

// Majority vote among the k nearest training samples (Euclidean). Distance
// ties go to the lower sample index; vote ties to the class with the smaller
// summed distance, then class 0.
int knn_classify(const TrainSet& train, std::span<const double> query, int k);

// ---------------------------------------------------------------------------
// Linear soft-margin SVM
// ---------------------------------------------------------------------------

class SvmConvergenceError : public std::runtime_error {
public:
    SvmConvergenceError(double violation, long iterations);
    double max_violation() const noexcept { return violation_; }

private:
    double violation_;
};

struct SvmModel {
    Vector weights;
    double bias = 0.0;
    std::vector<Index> support_indices;
    std::vector<double> dual_coefficients;
    double C = 1.0;
    double max_kkt_violation = 0.0;
    long iterations = 0;
};

inline constexpr double kSvmTolerance = 1e-3;
inline constexpr long kSvmMaxIterations = 100000;

// Dual coordinate ascent with maximal-violating-pair working sets.
SvmModel svm_train(const TrainSet& train, double C);
double svm_decision(const SvmModel& model, std::span<const double> query);
int svm_predict(const SvmModel& model, std::span<const double> query);
std::string format_svm_json(const SvmModel& model);

// ---------------------------------------------------------------------------
// Kernel-density naive Bayes
// ---------------------------------------------------------------------------

struct NbcModel {
    // samples[c][f]: training values of feature f in class c
    std::array<std::vector<std::vector<double>>, 2> samples;
    std::array<std::vector<double>, 2> bandwidths;
    std::array<double, 2> priors{0.5, 0.5};

    Index feature_count() const { return static_cast<Index>(samples[0].size()); }
};

struct NbcPrediction {
    int label = 0;
    std::array<double, 2> posterior{0.5, 0.5};
};

// Silverman's rule h = 1.06 * sigma * n^(-1/5), scaled by the multiplier.
double silverman_bandwidth(std::span<const double> values, double multiplier);

NbcModel nbc_train(const TrainSet& train, double bandwidth_multiplier);
NbcPrediction nbc_predict(const NbcModel& model, std::span<const double> query);

// ---------------------------------------------------------------------------
// Multilayer perceptron trained by scaled conjugate gradient
// ---------------------------------------------------------------------------

struct MlpModel {
    int hidden_count = 1;
    Matrix hidden_weights;  // hidden_count x inputs
    Vector hidden_bias;     // hidden_count
    Vector output_weights;  // hidden_count
    double output_bias = 0.0;
    double lambda = 0.0;
    // Objective value after every accepted optimizer step, starting at the initial weights.
    std::vector<double> loss_trace;
    int iterations = 0;

    Index input_count() const { return hidden_weights.cols(); }
};

struct MlpPrediction {
    int label = 0;
    double probability = 0.5;
};

inline constexpr double kMlpDefaultLambda = 0.01;
inline constexpr double kMlpGradientTolerance = 1e-5;
inline constexpr int kMlpMaxIterations = 500;

// Cross-entropy plus (lambda / 2) * sum of squared weights (biases excluded)
// as a function of a flat parameter vector.
class MlpObjective {
public:
    MlpObjective(const TrainSet& train, int hidden_count, double lambda);

    Index parameter_count() const;
    double value(const Vector& params) const;
    double value_and_gradient(const Vector& params, Vector& gradient) const;

    MlpModel unpack(const Vector& params) const;
    Vector pack(const MlpModel& model) const;

private:
    const TrainSet& train_;
    int hidden_;
    double lambda_;
};

MlpModel mlp_train(const TrainSet& train, int hidden_count, double lambda, std::uint64_t seed);
MlpPrediction mlp_predict(const MlpModel& model, std::span<const double> query);
std::string format_mlp_json(const MlpModel& model);

} // namespace genefilter::classifiers
