#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genefilter/dataio.hpp"

namespace genefilter {

enum class RankingMethod { fgf, ttest, wilcoxon, roc };

std::string_view to_string(RankingMethod method);
std::optional<RankingMethod> parse_ranking_method(std::string_view name);

// Outcome of one two-sample test on a single gene.
//
// statistic: t (Welch), W (rank sum of the summed group) or AUC.
// effect: mean(x) - mean(y) for the t-test, |W - E[W]| for Wilcoxon, |AUC - 0.5| for ROC.
// degrees_of_freedom is only meaningful for the t-test (0 otherwise).
struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    double effect = 0.0;
    double degrees_of_freedom = 0.0;
};

// Gene ordering from one method, most differentially expressed first.
// scores[g] is aligned to the original gene index: a p-value for the
// statistical tests, a defuzzified score for the fuzzy filter.
struct GeneRanking {
    RankingMethod method = RankingMethod::ttest;
    std::vector<Index> order;
    std::vector<double> scores;

    std::vector<Index> top(Index n) const;
};

namespace rankers {

// Average ranks (1-based) over `values`; ties share the mean of their positions.
std::vector<double> midranks(std::span<const double> values);

// Unpaired two-sample t-test with unequal variances.
TestResult welch_t_test(std::span<const double> x, std::span<const double> y);

// Rank-sum test. W sums the midranks of the smaller group (x when sizes are
// equal). Exact two-sided p when the pooled size is at most
// kWilcoxonExactLimit, otherwise the tie-corrected normal approximation with
// continuity correction.
inline constexpr std::size_t kWilcoxonExactLimit = 25;
TestResult wilcoxon_test(std::span<const double> x, std::span<const double> y);

// AUC = P(x > y) + P(x == y) / 2, tested against 0.5 with the Hanley-McNeil
// standard error (x plays the role of the positive class).
TestResult roc_test(std::span<const double> x, std::span<const double> y);

TestResult run_test(RankingMethod method, std::span<const double> x, std::span<const double> y);

// Gene-wise test of class 0 (x) against class 1 (y). Order: ascending p,
// then descending |effect|, then gene index.
GeneRanking rank_genes(const Dataset& dataset, RankingMethod method);

std::string format_ranking_tsv(const GeneRanking& ranking, const Dataset& dataset);

} // namespace rankers
} // namespace genefilter
