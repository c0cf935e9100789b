#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "genefilter/dataio.hpp"
#include "genefilter/rankers.hpp"

namespace genefilter::fgf {

// Transition zone between neighbouring linguistic labels; 0 < alpha < beta < 1.
struct FuzzyRegion {
    double alpha = 0.25;
    double beta = 0.75;

    bool valid() const { return 0.0 < alpha && alpha < beta && beta < 1.0; }
    bool operator==(const FuzzyRegion&) const = default;
};

struct FgfParams {
    FuzzyRegion fold_change;
    FuzzyRegion variance;
    FuzzyRegion rank_sum;

    bool valid() const { return fold_change.valid() && variance.valid() && rank_sum.valid(); }
    void validate() const;
    bool operator==(const FgfParams&) const = default;

    // Flat (alpha, beta) x {fold change, variance, rank sum}.
    std::array<double, 6> to_array() const;
    static FgfParams from_array(const std::array<double, 6>& values);
};

// {"fold_change":{"alpha":..,"beta":..},"variance":{..},"rank_sum":{..}}
std::string format_params_json(const FgfParams& params);
FgfParams parse_params_json(const std::string& text);

// Per-gene inputs, each min-max scaled to [0, 1] across genes.
struct FuzzyInputs {
    std::vector<double> fold_change;
    std::vector<double> variance;
    std::vector<double> rank_sum;

    std::size_t size() const { return fold_change.size(); }
};

FuzzyInputs compute_fuzzy_inputs(const Dataset& dataset);

struct Grades {
    double low = 0.0;
    double medium = 0.0;
    double high = 0.0;
};

// Piecewise-linear partition with crossovers at alpha and beta and its peak at
// their midpoint. Inputs outside [0, 1] are clamped and counted.
Grades membership_grades(double x, const FuzzyRegion& region);

// Number of clamped membership inputs since process start.
std::uint64_t clamp_count();

// Output vocabulary: VeryLow, Low, Medium, High, VeryHigh triangles on [0, 1].
inline constexpr int kOutputLevels = 5;
inline constexpr int kDefuzzGridPoints = 1001;

// Output level of the rule (fc, var, rs), each label 0=Low 1=Medium 2=High.
int rule_consequent(int fc_label, int var_label, int rs_label);

// Mamdani inference over the 27-rule block with centroid defuzzification.
double mamdani_infer(double fold_change, double variance, double rank_sum, const FgfParams& params);

// Centroid of the discretized aggregate when a single output level fires at full strength.
double level_centroid(int level);

// Inputs and tie-break p-values cached for repeated ranking under different params.
class FgfRanker {
public:
    explicit FgfRanker(const Dataset& dataset);

    GeneRanking rank(const FgfParams& params) const;
    const FuzzyInputs& inputs() const { return inputs_; }

private:
    FuzzyInputs inputs_;
    std::vector<double> ttest_p_;
};

// Descending score; ties by ascending t-test p-value, then gene index.
GeneRanking fgf_rank(const Dataset& dataset, const FgfParams& params);

} // namespace genefilter::fgf
