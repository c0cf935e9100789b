#include "genefilter/rankers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "genefilter/special_functions.hpp"
#include "genefilter/textio.hpp"

namespace genefilter {

std::string_view to_string(RankingMethod method) {
    switch (method) {
    case RankingMethod::fgf: return "fgf";
    case RankingMethod::ttest: return "ttest";
    case RankingMethod::wilcoxon: return "wilcoxon";
    case RankingMethod::roc: return "roc";
    }
    return "unknown";
}

std::optional<RankingMethod> parse_ranking_method(std::string_view name) {
    for (RankingMethod m : {RankingMethod::fgf, RankingMethod::ttest, RankingMethod::wilcoxon, RankingMethod::roc}) {
        if (name == to_string(m)) return m;
    }
    return std::nullopt;
}

std::vector<Index> GeneRanking::top(Index n) const {
    n = std::clamp<Index>(n, 0, static_cast<Index>(order.size()));
    return {order.begin(), order.begin() + n};
}

namespace rankers {

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // sample variance, 0 for constant input
};

Moments moments(std::span<const double> v) {
    Moments m;
    const double n = static_cast<double>(v.size());
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    if (*lo == *hi) {
        m.mean = *lo;
        return m;
    }
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.variance = ss / (n - 1.0);
    return m;
}

void require_size(std::span<const double> v, std::size_t minimum, const char* test, const char* which) {
    if (v.size() < minimum)
        throw InvalidInput(std::string(test) + ": sample " + which + " needs at least " + std::to_string(minimum) +
                           " values, got " + std::to_string(v.size()));
}

// Exact count of size-m subsets of `doubled_ranks` whose doubled-rank sum
// deviates from `doubled_expected` by at least `observed_deviation`.
double exact_rank_sum_p(const std::vector<std::int64_t>& doubled_ranks, std::size_t m, std::int64_t doubled_expected,
                        std::int64_t observed_deviation) {
    const std::int64_t max_sum = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), std::int64_t{0});
    // ways[k][s]: number of k-subsets with doubled sum s.
    std::vector<std::vector<std::uint64_t>> ways(m + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(max_sum + 1), 0));
    ways[0][0] = 1;
    std::int64_t reach = 0;
    for (std::int64_t r : doubled_ranks) {
        reach += r;
        for (std::size_t k = m; k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (std::int64_t s = reach; s >= r; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r)];
        }
    }
    std::uint64_t extreme = 0;
    std::uint64_t total = 0;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
        const std::uint64_t count = ways[m][static_cast<std::size_t>(s)];
        total += count;
        if (std::llabs(s - doubled_expected) >= observed_deviation) extreme += count;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

} // namespace

std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t start = 0;
    while (start < n) {
        std::size_t end = start + 1;
        while (end < n && values[idx[end]] == values[idx[start]]) ++end;
        // positions start+1 .. end share their average
        const double rank = 0.5 * static_cast<double>(start + 1 + end);
        for (std::size_t k = start; k < end; ++k) ranks[idx[k]] = rank;
        start = end;
    }
    return ranks;
}

TestResult welch_t_test(std::span<const double> x, std::span<const double> y) {
    require_size(x, 2, "welch_t_test", "x");
    require_size(y, 2, "welch_t_test", "y");
    const Moments mx = moments(x);
    const Moments my = moments(y);
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double vx = (mx.variance == 0.0 ? kVarianceFloor : mx.variance) / nx;
    const double vy = (my.variance == 0.0 ? kVarianceFloor : my.variance) / ny;
    const double se2 = vx + vy;

    TestResult result;
    result.effect = mx.mean - my.mean;
    result.statistic = result.effect / std::sqrt(se2);
    result.degrees_of_freedom = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    result.p_value = stats::student_t_two_sided(result.statistic, result.degrees_of_freedom);
    return result;
}

TestResult wilcoxon_test(std::span<const double> x, std::span<const double> y) {
    require_size(x, 1, "wilcoxon_test", "x");
    require_size(y, 1, "wilcoxon_test", "y");
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::vector<double> ranks = midranks(pooled);

    const bool sum_x = x.size() <= y.size();
    const std::size_t m = sum_x ? x.size() : y.size();
    const std::size_t first = sum_x ? 0 : x.size();
    const std::size_t total = pooled.size();

    // Midranks are multiples of 1/2, so doubled ranks make the statistic integral.
    std::int64_t doubled_w = 0;
    for (std::size_t i = first; i < first + m; ++i) doubled_w += std::llround(2.0 * ranks[i]);
    const std::int64_t doubled_expected = static_cast<std::int64_t>(m * (total + 1));
    const std::int64_t doubled_deviation = std::llabs(doubled_w - doubled_expected);

    TestResult result;
    result.statistic = 0.5 * static_cast<double>(doubled_w);
    result.effect = 0.5 * static_cast<double>(doubled_deviation);

    if (total <= kWilcoxonExactLimit) {
        std::vector<std::int64_t> doubled_ranks(total);
        for (std::size_t i = 0; i < total; ++i) doubled_ranks[i] = std::llround(2.0 * ranks[i]);
        result.p_value = exact_rank_sum_p(doubled_ranks, m, doubled_expected, doubled_deviation);
        return result;
    }

    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i + 1;
        while (j < total && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    const double nm = static_cast<double>(m);
    const double nn = static_cast<double>(total - m);
    const double nt = static_cast<double>(total);
    const double variance = nm * nn / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
    if (variance <= 0.0) {
        result.p_value = 1.0;
        return result;
    }
    const double z = std::max(0.0, result.effect - 0.5) / std::sqrt(variance);
    result.p_value = stats::normal_two_sided(z);
    return result;
}

TestResult roc_test(std::span<const double> x, std::span<const double> y) {
    require_size(x, 2, "roc_test", "x");
    require_size(y, 2, "roc_test", "y");
    std::vector<double> pooled(x.begin(), x.end());
    pooled.insert(pooled.end(), y.begin(), y.end());
    const std::vector<double> ranks = midranks(pooled);
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double rank_sum_x = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
    const double u = rank_sum_x - nx * (nx + 1.0) / 2.0;
    const double auc = u / (nx * ny);

    TestResult result;
    result.statistic = auc;
    result.effect = std::fabs(auc - 0.5);

    const double q1 = auc / (2.0 - auc);
    const double q2 = 2.0 * auc * auc / (1.0 + auc);
    const double a2 = auc * auc;
    const double variance =
        std::max(0.0, (auc * (1.0 - auc) + (nx - 1.0) * (q1 - a2) + (ny - 1.0) * (q2 - a2)) / (nx * ny));
    if (variance == 0.0) {
        result.p_value = auc == 0.5 ? 1.0 : 0.0;
    } else {
        result.p_value = stats::normal_two_sided((auc - 0.5) / std::sqrt(variance));
    }
    return result;
}

TestResult run_test(RankingMethod method, std::span<const double> x, std::span<const double> y) {
    switch (method) {
    case RankingMethod::ttest: return welch_t_test(x, y);
    case RankingMethod::wilcoxon: return wilcoxon_test(x, y);
    case RankingMethod::roc: return roc_test(x, y);
    case RankingMethod::fgf: break;
    }
    throw InvalidInput("run_test: the fuzzy filter is not a two-sample test");
}

GeneRanking rank_genes(const Dataset& dataset, RankingMethod method) {
    if (method == RankingMethod::fgf) throw InvalidInput("rank_genes: use fgf_rank for the fuzzy gene filter");
    const Index n_genes = dataset.gene_count();
    std::vector<TestResult> results(static_cast<std::size_t>(n_genes));
    for (Index g = 0; g < n_genes; ++g) {
        const auto groups = dataset.split_by_class(g);
        try {
            results[static_cast<std::size_t>(g)] = run_test(method, groups[0], groups[1]);
        } catch (const std::exception& e) {
            throw InvalidInput("gene '" + dataset.gene_ids[static_cast<std::size_t>(g)] + "': " + e.what());
        }
    }

    GeneRanking ranking;
    ranking.method = method;
    ranking.scores.resize(results.size());
    for (std::size_t g = 0; g < results.size(); ++g) ranking.scores[g] = results[g].p_value;
    ranking.order.resize(results.size());
    std::iota(ranking.order.begin(), ranking.order.end(), Index{0});
    std::sort(ranking.order.begin(), ranking.order.end(), [&](Index a, Index b) {
        const TestResult& ra = results[static_cast<std::size_t>(a)];
        const TestResult& rb = results[static_cast<std::size_t>(b)];
        if (ra.p_value != rb.p_value) return ra.p_value < rb.p_value;
        const double ea = std::fabs(ra.effect);
        const double eb = std::fabs(rb.effect);
        if (ea != eb) return ea > eb;
        return a < b;
    });
    return ranking;
}

std::string format_ranking_tsv(const GeneRanking& ranking, const Dataset& dataset) {
    std::string out = "rank\tgene_id\tscore\n";
    for (std::size_t r = 0; r < ranking.order.size(); ++r) {
        const auto g = static_cast<std::size_t>(ranking.order[r]);
        out += std::to_string(r + 1);
        out += '\t';
        out += dataset.gene_ids[g];
        out += '\t';
        out += textio::format_double(ranking.scores[g]);
        out += '\n';
    }
    return out;
}

} // namespace rankers
} // namespace genefilter
