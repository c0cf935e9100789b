#pragma once

// Independent reference implementations used to check the library. They
// favour directness over speed and take tail probabilities from Boost.Math.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace genefilter::oracle {

struct Welch {
    double t, df, p;
};

inline Welch welch(const std::vector<double>& x, const std::vector<double>& y) {
    auto mean = [](const std::vector<double>& v) {
        long double s = 0;
        for (double a : v) s += a;
        return static_cast<double>(s / v.size());
    };
    auto var = [](const std::vector<double>& v, double m) {
        long double s = 0;
        for (double a : v) s += (a - m) * (a - m);
        return static_cast<double>(s / (v.size() - 1));
    };
    const double mx = mean(x), my = mean(y);
    const double ax = var(x, mx) / x.size(), ay = var(y, my) / y.size();
    const double t = (mx - my) / std::sqrt(ax + ay);
    const double df = (ax + ay) * (ax + ay) / (ax * ax / (x.size() - 1) + ay * ay / (y.size() - 1));
    const boost::math::students_t dist(df);
    return {t, df, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)))};
}

// Midrank by counting: 1 + #smaller + (#equal - 1) / 2.
inline std::vector<double> count_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, equal = 0;
        for (double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = 1.0 + less + (equal - 1.0) / 2.0;
    }
    return r;
}

struct RankSum {
    double w, p;
};

// Two-sided exact rank-sum p by listing every assignment of the pooled ranks
// to the smaller group (x when sizes tie).
inline RankSum rank_sum_enumeration(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> pooled = x;
    pooled.insert(pooled.end(), y.begin(), y.end());
    const auto ranks = count_ranks(pooled);
    const bool use_x = x.size() <= y.size();
    const std::size_t m = use_x ? x.size() : y.size(), n = pooled.size();
    double w = 0;
    for (std::size_t i = 0; i < m; ++i) w += ranks[use_x ? i : x.size() + i];
    const double expected = m * (n + 1) / 2.0;
    const double observed = std::fabs(w - expected);
    std::uint64_t extreme = 0, total = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != m) continue;
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask >> i & 1u) s += ranks[i];
        ++total;
        if (std::fabs(s - expected) >= observed) ++extreme;
    }
    return {w, static_cast<double>(extreme) / static_cast<double>(total)};
}

inline double auc_pairwise(const std::vector<double>& x, const std::vector<double>& y) {
    double wins = 0;
    for (double a : x)
        for (double b : y) wins += a > b ? 1.0 : a == b ? 0.5 : 0.0;
    return wins / (x.size() * y.size());
}

// Two-sided z-test of AUC against 0.5 with the Hanley-McNeil standard error.
inline double hanley_mcneil_p(double auc, double nx, double ny) {
    const double q1 = auc / (2 - auc), q2 = 2 * auc * auc / (1 + auc);
    const double se2 = (auc * (1 - auc) + (nx - 1) * (q1 - auc * auc) + (ny - 1) * (q2 - auc * auc)) / (nx * ny);
    if (se2 <= 0) return auc == 0.5 ? 1.0 : 0.0;
    const boost::math::normal_distribution<double> z;
    return 2.0 * boost::math::cdf(boost::math::complement(z, std::fabs(auc - 0.5) / std::sqrt(se2)));
}

struct Anova {
    double F, p;
};

inline Anova anova(const std::vector<std::vector<double>>& groups) {
    long double grand = 0;
    std::size_t n = 0;
    for (const auto& g : groups)
        for (double v : g) grand += v, ++n;
    grand /= n;
    long double ssb = 0, ssw = 0;
    for (const auto& g : groups) {
        long double m = 0;
        for (double v : g) m += v;
        m /= g.size();
        ssb += g.size() * (m - grand) * (m - grand);
        for (double v : g) ssw += (v - m) * (v - m);
    }
    const double d1 = groups.size() - 1.0, d2 = n - static_cast<double>(groups.size());
    const double F = static_cast<double>((ssb / d1) / (ssw / d2));
    const boost::math::fisher_f dist(d1, d2);
    return {F, boost::math::cdf(boost::math::complement(dist, F))};
}

// One-way ANOVA of the paper-table accuracy groups, evaluated offline with
// scipy.stats.f_oneway and frozen here.
inline constexpr double kTable1F = 4.5937940761636185;
inline constexpr double kTable1P = 0.023093204261982508;
inline constexpr double kTable2F = 1.8679245283018833;
inline constexpr double kTable2P = 0.1888243833662764;

inline const std::vector<std::vector<double>> kTable1Groups{
    {96.1, 95.0, 94.1, 95.0}, {93.1, 94.1, 93.1, 93.1}, {94.1, 94.1, 93.1, 94.1}, {93.1, 95.0, 94.1, 94.1}};
inline const std::vector<std::vector<double>> kTable2Groups{
    {100, 100, 97.4, 98.7}, {97.4, 98.7, 97.4, 94.8}, {94.8, 98.7, 97.4, 97.4}, {98.7, 98.7, 97.4, 97.4}};

// Brute-force k nearest neighbours with the documented tie rules.
inline int knn_brute(const std::vector<std::vector<double>>& pts, const std::vector<int>& labels,
                     const std::vector<double>& q, int k) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double s = 0;
        for (std::size_t f = 0; f < q.size(); ++f) s += (pts[i][f] - q[f]) * (pts[i][f] - q[f]);
        d.push_back({std::sqrt(s), i});
    }
    std::sort(d.begin(), d.end());
    int votes[2] = {0, 0};
    double dist[2] = {0, 0};
    for (int i = 0; i < k; ++i) {
        votes[labels[d[i].second]]++;
        dist[labels[d[i].second]] += d[i].first;
    }
    if (votes[0] != votes[1]) return votes[1] > votes[0] ? 1 : 0;
    return dist[1] < dist[0] ? 1 : 0;
}

} // namespace genefilter::oracle
