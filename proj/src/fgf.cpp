#include "genefilter/fgf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace genefilter::fgf {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

void validate_region(const FuzzyRegion& region, const char* name) {
    if (!region.valid())
        throw InvalidInput(std::string("fgf params: ") + name + " requires 0 < alpha < beta < 1 (alpha=" +
                           std::to_string(region.alpha) + ", beta=" + std::to_string(region.beta) + ")");
}

void min_max_scale(std::vector<double>& values) {
    if (values.empty()) return;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double range = *hi_it - lo;
    for (double& v : values) v = range > 0.0 ? (v - lo) / range : 0.0;
}

// Output-set membership sampled on the defuzzification grid.
struct OutputTable {
    std::array<double, kDefuzzGridPoints> grid{};
    std::array<std::array<double, kDefuzzGridPoints>, kOutputLevels> membership{};

    OutputTable() {
        constexpr double kHalfWidth = 0.25;
        for (int i = 0; i < kDefuzzGridPoints; ++i) {
            const double y = static_cast<double>(i) / static_cast<double>(kDefuzzGridPoints - 1);
            grid[static_cast<std::size_t>(i)] = y;
            for (int l = 0; l < kOutputLevels; ++l) {
                const double peak = static_cast<double>(l) / static_cast<double>(kOutputLevels - 1);
                membership[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)] =
                    std::max(0.0, 1.0 - std::fabs(y - peak) / kHalfWidth);
            }
        }
    }
};

const OutputTable& output_table() {
    static const OutputTable table;
    return table;
}

double defuzzify(const std::array<double, kOutputLevels>& strength) {
    const OutputTable& table = output_table();
    double weighted = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(kDefuzzGridPoints); ++i) {
        double mu = 0.0;
        for (std::size_t l = 0; l < static_cast<std::size_t>(kOutputLevels); ++l) {
            mu = std::max(mu, std::min(strength[l], table.membership[l][i]));
        }
        weighted += table.grid[i] * mu;
        mass += mu;
    }
    return mass > 0.0 ? weighted / mass : 0.5;
}

} // namespace

void FgfParams::validate() const {
    validate_region(fold_change, "fold_change");
    validate_region(variance, "variance");
    validate_region(rank_sum, "rank_sum");
}

std::array<double, 6> FgfParams::to_array() const {
    return {fold_change.alpha, fold_change.beta, variance.alpha, variance.beta, rank_sum.alpha, rank_sum.beta};
}

FgfParams FgfParams::from_array(const std::array<double, 6>& v) {
    return FgfParams{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}};
}

std::string format_params_json(const FgfParams& params) {
    auto region = [](const FuzzyRegion& r) { return nlohmann::ordered_json{{"alpha", r.alpha}, {"beta", r.beta}}; };
    nlohmann::ordered_json json;
    json["fold_change"] = region(params.fold_change);
    json["variance"] = region(params.variance);
    json["rank_sum"] = region(params.rank_sum);
    return json.dump(2) + "\n";
}

FgfParams parse_params_json(const std::string& text) {
    nlohmann::json json;
    try {
        json = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("fgf params: malformed JSON: ") + e.what());
    }
    auto region = [&](const char* key) {
        if (!json.contains(key) || !json[key].is_object()) throw InvalidInput(std::string("fgf params: missing '") + key + "'");
        const auto& r = json[key];
        if (!r.contains("alpha") || !r.contains("beta") || !r["alpha"].is_number() || !r["beta"].is_number())
            throw InvalidInput(std::string("fgf params: '") + key + "' needs numeric alpha and beta");
        return FuzzyRegion{r["alpha"].get<double>(), r["beta"].get<double>()};
    };
    FgfParams params{region("fold_change"), region("variance"), region("rank_sum")};
    params.validate();
    return params;
}

FuzzyInputs compute_fuzzy_inputs(const Dataset& dataset) {
    dataset.validate();
    const Index n_genes = dataset.gene_count();
    const Index n_samples = dataset.sample_count();
    const Matrix& x = dataset.matrix;

    // Shift keeping class means positive before the log ratio.
    const double floor_eps = 1e-6 * x.cwiseAbs().mean();
    const double shift = floor_eps + std::max(0.0, -x.minCoeff());

    const Matrix standardized = dataio::standardize_genes(x);
    const std::array<double, 2> class_n{static_cast<double>(dataset.class_size(0)),
                                        static_cast<double>(dataset.class_size(1))};
    const int summed_class = class_n[0] <= class_n[1] ? 0 : 1;
    const double expected_rank_sum = class_n[static_cast<std::size_t>(summed_class)] * (static_cast<double>(n_samples) + 1.0) / 2.0;

    FuzzyInputs inputs;
    inputs.fold_change.resize(static_cast<std::size_t>(n_genes));
    inputs.variance.resize(static_cast<std::size_t>(n_genes));
    inputs.rank_sum.resize(static_cast<std::size_t>(n_genes));

    std::vector<double> row(static_cast<std::size_t>(n_samples));
    for (Index g = 0; g < n_genes; ++g) {
        std::array<double, 2> sum{0.0, 0.0};
        std::array<double, 2> std_sum{0.0, 0.0};
        for (Index j = 0; j < n_samples; ++j) {
            const auto c = static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(j)]);
            sum[c] += x(g, j);
            std_sum[c] += standardized(g, j);
        }
        const double mean0 = sum[0] / class_n[0];
        const double mean1 = sum[1] / class_n[1];
        inputs.fold_change[static_cast<std::size_t>(g)] = std::fabs(std::log2(mean0 + shift) - std::log2(mean1 + shift));

        const std::array<double, 2> std_mean{std_sum[0] / class_n[0], std_sum[1] / class_n[1]};
        std::array<double, 2> ss{0.0, 0.0};
        for (Index j = 0; j < n_samples; ++j) {
            const auto c = static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(j)]);
            const double d = standardized(g, j) - std_mean[c];
            ss[c] += d * d;
        }
        inputs.variance[static_cast<std::size_t>(g)] = (ss[0] + ss[1]) / static_cast<double>(n_samples - 2);

        for (Index j = 0; j < n_samples; ++j) row[static_cast<std::size_t>(j)] = x(g, j);
        const std::vector<double> ranks = rankers::midranks(row);
        double rank_sum = 0.0;
        for (Index j = 0; j < n_samples; ++j) {
            if (dataset.labels[static_cast<std::size_t>(j)] == summed_class) rank_sum += ranks[static_cast<std::size_t>(j)];
        }
        inputs.rank_sum[static_cast<std::size_t>(g)] = std::fabs(rank_sum - expected_rank_sum);
    }

    min_max_scale(inputs.fold_change);
    min_max_scale(inputs.variance);
    min_max_scale(inputs.rank_sum);
    return inputs;
}

Grades membership_grades(double x, const FuzzyRegion& region) {
    if (x < 0.0 || x > 1.0 || std::isnan(x)) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        x = std::isnan(x) ? 0.0 : std::clamp(x, 0.0, 1.0);
    }
    const double a = region.alpha;
    const double b = region.beta;
    const double m = 0.5 * (a + b);

    Grades g;
    if (x <= a) {
        g.low = 1.0;
    } else if (x <= m) {
        g.low = (m - x) / (m - a);
        g.medium = (x - a) / (m - a);
    } else if (x < b) {
        g.high = (x - m) / (b - m);
        g.medium = (b - x) / (b - m);
    } else {
        g.high = 1.0;
    }
    return g;
}

std::uint64_t clamp_count() {
    return g_clamp_count.load(std::memory_order_relaxed);
}

int rule_consequent(int fc_label, int var_label, int rs_label) {
    // Goodness points: fold change and rank sum reward High, variance rewards Low.
    const int goodness = fc_label + (2 - var_label) + rs_label;
    switch (goodness) {
    case 0:
    case 1: return 0;
    case 2: return 1;
    case 3: return 2;
    case 4: return 3;
    default: return 4;
    }
}

double mamdani_infer(double fold_change, double variance, double rank_sum, const FgfParams& params) {
    const Grades fc = membership_grades(fold_change, params.fold_change);
    const Grades var = membership_grades(variance, params.variance);
    const Grades rs = membership_grades(rank_sum, params.rank_sum);
    const std::array<double, 3> fc_g{fc.low, fc.medium, fc.high};
    const std::array<double, 3> var_g{var.low, var.medium, var.high};
    const std::array<double, 3> rs_g{rs.low, rs.medium, rs.high};

    // Product AND; rules sharing a consequent accumulate by bounded sum.
    std::array<double, kOutputLevels> strength{};
    for (int i = 0; i < 3; ++i) {
        if (fc_g[static_cast<std::size_t>(i)] == 0.0) continue;
        for (int j = 0; j < 3; ++j) {
            if (var_g[static_cast<std::size_t>(j)] == 0.0) continue;
            for (int k = 0; k < 3; ++k) {
                const double firing =
                    fc_g[static_cast<std::size_t>(i)] * var_g[static_cast<std::size_t>(j)] * rs_g[static_cast<std::size_t>(k)];
                strength[static_cast<std::size_t>(rule_consequent(i, j, k))] += firing;
            }
        }
    }
    for (double& s : strength) s = std::min(s, 1.0);
    return defuzzify(strength);
}

double level_centroid(int level) {
    if (level < 0 || level >= kOutputLevels) throw InvalidInput("level_centroid: level out of range");
    std::array<double, kOutputLevels> strength{};
    strength[static_cast<std::size_t>(level)] = 1.0;
    return defuzzify(strength);
}

FgfRanker::FgfRanker(const Dataset& dataset) : inputs_(compute_fuzzy_inputs(dataset)) {
    const GeneRanking ttest = rankers::rank_genes(dataset, RankingMethod::ttest);
    ttest_p_ = ttest.scores;
}

GeneRanking FgfRanker::rank(const FgfParams& params) const {
    params.validate();
    GeneRanking ranking;
    ranking.method = RankingMethod::fgf;
    const std::size_t n = inputs_.size();
    ranking.scores.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
        ranking.scores[g] = mamdani_infer(inputs_.fold_change[g], inputs_.variance[g], inputs_.rank_sum[g], params);
    }
    ranking.order.resize(n);
    std::iota(ranking.order.begin(), ranking.order.end(), Index{0});
    std::sort(ranking.order.begin(), ranking.order.end(), [&](Index a, Index b) {
        const auto ua = static_cast<std::size_t>(a);
        const auto ub = static_cast<std::size_t>(b);
        if (ranking.scores[ua] != ranking.scores[ub]) return ranking.scores[ua] > ranking.scores[ub];
        if (ttest_p_[ua] != ttest_p_[ub]) return ttest_p_[ua] < ttest_p_[ub];
        return a < b;
    });
    return ranking;
}

GeneRanking fgf_rank(const Dataset& dataset, const FgfParams& params) {
    params.validate();
    return FgfRanker(dataset).rank(params);
}

} // namespace genefilter::fgf
