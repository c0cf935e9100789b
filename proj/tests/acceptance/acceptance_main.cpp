// Acceptance suite: one PASS/FAIL line per headline criterion; exit status 1
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "genefilter/cli.hpp"
#include "genefilter/crossval.hpp"
#include "genefilter/report.hpp"
#include "genefilter/textio.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace genefilter;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            detail << (pass ? "failed: " : "; ") << what << " | ";
            pass = false;
        }
    }
};

int g_failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Outcome&)>& body) {
    Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(outcome);
    } catch (const std::exception& e) {
        outcome.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.require(seconds <= budget_seconds, "runtime over budget");
    if (!outcome.pass) ++g_failures;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << " (" << std::fixed << std::setprecision(2) << seconds
              << " s) " << outcome.detail.str() << std::defaultfloat << std::endl;
}

std::vector<double> draw(std::mt19937_64& rng, std::size_t n, bool ties) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_int_distribution<int> coarse(0, 3);
    std::vector<double> v(n);
    for (auto& x : v) x = ties ? coarse(rng) : nd(rng);
    return v;
}

std::vector<double> row_of(const classifiers::TrainSet& t, Index i) {
    std::vector<double> v(static_cast<std::size_t>(t.feature_count()));
    for (Index c = 0; c < t.feature_count(); ++c) v[static_cast<std::size_t>(c)] = t.features(i, c);
    return v;
}

gaopt::GaConfig acceptance_ga(std::uint64_t seed) {
    gaopt::GaConfig c;
    c.population_size = 20;
    c.generations = 15;
    c.top_n_genes = 20;
    c.seed = seed;
    return c;
}

void anova_reproduction(Outcome& o) {
    const AnovaResult t1 = crossval::anova_oneway(oracle::kTable1Groups);
    const AnovaResult t2 = crossval::anova_oneway(oracle::kTable2Groups);
    const auto b1 = oracle::anova(oracle::kTable1Groups);
    const auto b2 = oracle::anova(oracle::kTable2Groups);
    o.require(t1.p < 0.0231 + 0.005, "table 1 p above reported bound");
    o.require(t2.p < 0.1888 + 0.005, "table 2 p above reported bound");
    o.require(std::fabs(t1.p - oracle::kTable1P) <= 1e-10 && std::fabs(t1.F - oracle::kTable1F) <= 1e-10,
              "table 1 differs from frozen reference");
    o.require(std::fabs(t2.p - oracle::kTable2P) <= 1e-10 && std::fabs(t2.F - oracle::kTable2F) <= 1e-10,
              "table 2 differs from frozen reference");
    o.require(std::fabs(t1.p - b1.p) <= 1e-10 && std::fabs(t2.p - b2.p) <= 1e-10, "differs from Boost F oracle");
    o.detail << "table1 F=" << t1.F << " p=" << t1.p << "; table2 F=" << t2.F << " p=" << t2.p;
}

void statistical_oracles(Outcome& o) {
    std::mt19937_64 rng(2718);
    int bad_t = 0, bad_w = 0, bad_roc = 0;
    for (int i = 0; i < 500; ++i) {
        const std::size_t nx = std::uniform_int_distribution<std::size_t>(2, 8)(rng);
        const std::size_t ny = std::uniform_int_distribution<std::size_t>(2, 10 - nx)(rng);
        const bool ties = i % 2 == 1;
        const auto x = draw(rng, nx, ties), y = draw(rng, ny, ties);

        const auto xc = draw(rng, nx, false), yc = draw(rng, ny, false);
        const auto t = rankers::welch_t_test(xc, yc);
        const auto to = oracle::welch(xc, yc);
        bad_t += !(std::fabs(t.statistic - to.t) <= 1e-10 && std::fabs(t.p_value - to.p) <= 1e-10 &&
                   std::fabs(t.degrees_of_freedom - to.df) <= 1e-10);

        const auto w = rankers::wilcoxon_test(x, y);
        const auto wo = oracle::rank_sum_enumeration(x, y);
        bad_w += !(w.statistic == wo.w && w.p_value == wo.p);

        const auto r = rankers::roc_test(x, y);
        const double auc = oracle::auc_pairwise(x, y);
        bad_roc += !(r.statistic == auc && std::fabs(r.p_value - oracle::hanley_mcneil_p(auc, nx, ny)) <= 1e-10);
    }
    o.require(bad_t == 0, std::to_string(bad_t) + " Welch mismatches");
    o.require(bad_w == 0, std::to_string(bad_w) + " rank-sum mismatches");
    o.require(bad_roc == 0, std::to_string(bad_roc) + " ROC mismatches");
    o.detail << "500 instances each: welch " << bad_t << ", wilcoxon " << bad_w << ", roc " << bad_roc << " mismatches";
}

void fuzzy_engine(Outcome& o) {
    std::mt19937_64 rng(31415);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto region = [&] {
        double a = unit(rng), b = unit(rng);
        while (a == b || std::min(a, b) == 0.0) a = unit(rng);
        return fgf::FuzzyRegion{std::min(a, b), std::max(a, b)};
    };
    double worst_sum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto g = fgf::membership_grades(unit(rng), region());
        worst_sum = std::max(worst_sum, std::fabs(g.low + g.medium + g.high - 1.0));
    }
    o.require(worst_sum <= 1e-12, "partition of unity");

    const fgf::FgfParams defaults;
    const double hi = fgf::mamdani_infer(1, 0, 1, defaults);
    const double lo = fgf::mamdani_infer(0, 1, 0, defaults);
    o.require(std::fabs(hi - 11.0 / 12.0) <= 1e-3, "VeryHigh extreme");
    o.require(std::fabs(lo - 1.0 / 12.0) <= 1e-3, "VeryLow extreme");

    int violations = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const fgf::FgfParams p{region(), region(), region()};
        const double var = unit(rng), rs = unit(rng);
        double previous = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double s = fgf::mamdani_infer(i / 100.0, var, rs, p);
            violations += s < previous - 1e-12;
            previous = s;
        }
    }
    o.require(violations == 0, std::to_string(violations) + " monotonicity violations");
    o.detail << "max |sum-1|=" << worst_sum << ", extremes " << hi << " / " << lo << ", monotone violations "
             << violations;
}

void ga_suite(Outcome& o) {
    int wins = 0;
    bool monotone = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto data = testing::make_planted({.genes = 500, .per_class = 20, .planted = 20, .seed = 500 + seed}).dataset;
        const auto result = gaopt::optimize_fgf(data, acceptance_ga(seed));
        const auto& f = result.trace.best_fitness;
        for (std::size_t g = 1; g < f.size(); ++g) monotone = monotone && f[g] >= f[g - 1];
        const double baseline = gaopt::separability_index(data, fgf::fgf_rank(data, fgf::FgfParams{}), 20);
        wins += f.back() >= baseline;
    }
    o.require(monotone, "best-fitness trace decreased");
    o.require(wins >= 18, "optimized beat defaults in only " + std::to_string(wins) + "/20 seeds");

    const auto data = testing::make_planted({.genes = 500, .per_class = 20, .planted = 20, .seed = 999}).dataset;
    const auto a = gaopt::optimize_fgf(data, acceptance_ga(7));
    const auto b = gaopt::optimize_fgf(data, acceptance_ga(7));
    o.require(a.params == b.params && a.trace.best_fitness == b.trace.best_fitness, "not deterministic");
    o.detail << "optimized >= default SI in " << wins << "/20 seeds; traces non-decreasing: " << (monotone ? "yes" : "no")
             << "; repeat run bit-identical: " << (a.params == b.params ? "yes" : "no");
}

void classifier_suite(Outcome& o) {
    // MLP gradient
    double worst_grad = 0.0;
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const auto t = testing::make_blobs(6, 3, 1.0, 50 + trial);
        const classifiers::MlpObjective obj(t, 3, trial % 2 ? 0.01 : 0.0);
        Vector p(obj.parameter_count());
        for (Index i = 0; i < p.size(); ++i) p(i) = 0.5 * nd(rng);
        Vector g;
        obj.value_and_gradient(p, g);
        for (Index i = 0; i < p.size(); ++i) {
            Vector up = p, down = p;
            up(i) += 1e-6;
            down(i) -= 1e-6;
            const double numeric = (obj.value(up) - obj.value(down)) / 2e-6;
            worst_grad = std::max(worst_grad, std::fabs(numeric - g(i)) / std::max({std::fabs(numeric), std::fabs(g(i)), 1e-2}));
        }
    }
    o.require(worst_grad < 1e-6, "MLP gradient check");

    // SVM on separable problems
    double worst_kkt = 0.0, worst_balance = 0.0;
    bool feasible = true, separated = true;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto t = testing::make_blobs(10, 2, 8.0, seed);
        const auto m = classifiers::svm_train(t, 100.0);
        worst_kkt = std::max(worst_kkt, m.max_kkt_violation);
        double balance = 0.0;
        for (std::size_t s = 0; s < m.support_indices.size(); ++s) {
            const double a = m.dual_coefficients[s];
            feasible = feasible && a >= 0.0 && a <= m.C;
            balance += (t.labels[static_cast<std::size_t>(m.support_indices[s])] == 1 ? 1.0 : -1.0) * a;
        }
        worst_balance = std::max(worst_balance, std::fabs(balance));
        for (Index i = 0; i < t.sample_count(); ++i)
            separated = separated && classifiers::svm_predict(m, row_of(t, i)) == t.labels[static_cast<std::size_t>(i)];
    }
    o.require(worst_kkt < 1e-3, "SVM KKT violation");
    o.require(feasible && worst_balance < 1e-6, "SVM dual feasibility");
    o.require(separated, "SVM training accuracy below 100% on separable data");

    // KNN against brute force
    const auto knn_train = testing::make_blobs(10, 3, 1.0, 77);
    std::vector<std::vector<double>> pts;
    for (Index i = 0; i < knn_train.sample_count(); ++i) pts.push_back(row_of(knn_train, i));
    int knn_mismatch = 0;
    for (int q = 0; q < 100; ++q) {
        const std::vector<double> query{nd(rng), nd(rng), nd(rng)};
        for (int k : {1, 3, 5})
            knn_mismatch += classifiers::knn_classify(knn_train, query, k) != oracle::knn_brute(pts, knn_train.labels, query, k);
    }
    o.require(knn_mismatch == 0, "KNN differs from brute force");

    // NBC normalization and symmetry
    const auto nbc_train = testing::make_blobs(8, 3, 2.0, 5);
    const auto model = classifiers::nbc_train(nbc_train, 1.0);
    double worst_norm = 0.0;
    for (int q = 0; q < 100; ++q) {
        const std::vector<double> query{3 * nd(rng), 3 * nd(rng), 3 * nd(rng)};
        const auto p = classifiers::nbc_predict(model, query);
        worst_norm = std::max(worst_norm, std::fabs(p.posterior[0] + p.posterior[1] - 1.0));
    }
    o.require(worst_norm <= 1e-12, "NBC posteriors do not sum to 1");
    classifiers::TrainSet mirror;
    mirror.features.resize(4, 2);
    mirror.features << -3, 1, -1, 2, 3, 1, 1, 2;
    mirror.labels = {0, 0, 1, 1};
    const std::vector<double> centre{0.0, 1.5};
    const auto sym = classifiers::nbc_predict(classifiers::nbc_train(mirror, 1.0), centre);
    o.require(std::fabs(sym.posterior[0] - 0.5) <= 1e-12 && std::fabs(sym.posterior[1] - 0.5) <= 1e-12,
              "NBC symmetric posterior");

    o.detail << "mlp grad rel err " << worst_grad << "; svm max KKT " << worst_kkt << ", |sum a*y| " << worst_balance
             << "; knn mismatches " << knn_mismatch << "; nbc max |sum-1| " << worst_norm;
}

void end_to_end(Outcome& o) {
    const std::array<RankingMethod, 4> methods{RankingMethod::fgf, RankingMethod::ttest, RankingMethod::wilcoxon,
                                               RankingMethod::roc};
    const std::array<ClassifierKind, 4> kinds{ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::nbc,
                                              ClassifierKind::mlp};
    auto planted_spec = [](std::uint64_t seed) {
        return testing::PlantedSpec{.genes = 1000, .per_class = 20, .planted = 20, .shift = 2.0, .seed = seed};
    };

    // Recovery and classification on the reference dataset.
    const auto reference = testing::make_planted(planted_spec(1));
    const auto params = gaopt::optimize_fgf(reference.dataset, acceptance_ga(1)).params;
    Index worst_hits = 1000;
    std::ostringstream hits;
    for (RankingMethod m : methods) {
        const GeneRanking r =
            m == RankingMethod::fgf ? fgf::fgf_rank(reference.dataset, params) : rankers::rank_genes(reference.dataset, m);
        const Index h = testing::count_hits(r.order, reference.planted, 30);
        worst_hits = std::min(worst_hits, h);
        hits << to_string(m) << "=" << h << " ";
    }
    o.require(worst_hits >= 18, "planted recovery in top 30: " + hits.str());

    crossval::LoocvOptions options;
    options.fgf_params = params;
    std::ostringstream accs;
    double worst_acc = 1.0;
    for (ClassifierKind k : kinds) {
        const double acc = crossval::loocv_accuracy(reference.dataset, RankingMethod::fgf, k, 20, options);
        worst_acc = std::min(worst_acc, acc);
        accs << to_string(k) << "=" << acc << " ";
    }
    o.require(worst_acc >= 0.95, "LOOCV at k=20: " + accs.str());

    // Separability of the fuzzy filter's top genes against each baseline.
    int si_wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto data = testing::make_planted(planted_spec(100 + seed)).dataset;
        const auto tuned = gaopt::optimize_fgf(data, acceptance_ga(seed)).params;
        const double fgf_si = gaopt::separability_index(data, fgf::fgf_rank(data, tuned), 20);
        bool beats_all = true;
        for (RankingMethod m : {RankingMethod::ttest, RankingMethod::wilcoxon, RankingMethod::roc})
            beats_all = beats_all && fgf_si >= gaopt::separability_index(data, rankers::rank_genes(data, m), 20);
        si_wins += beats_all;
    }
    o.require(si_wins >= 8, "FGF SI >= every baseline in only " + std::to_string(si_wins) + "/10 seeds");
    o.detail << "top-30 hits " << hits.str() << "; LOOCV(fgf, k=20) " << accs.str() << "; SI wins " << si_wins << "/10";
}

void protocol_invariants(Outcome& o) {
    // LOOCV granularity
    const auto data = testing::make_planted({.genes = 80, .per_class = 9, .planted = 4, .shift = 1.0, .seed = 8}).dataset;
    crossval::LoocvOptions options;
    bool multiples = true;
    for (ClassifierKind k : {ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::nbc, ClassifierKind::mlp}) {
        const double acc = crossval::loocv_accuracy(data, RankingMethod::ttest, k, 5, options);
        const double scaled = acc * 18.0;
        multiples = multiples && scaled == std::round(scaled);
    }
    o.require(multiples, "LOOCV accuracy not a multiple of 1/n");

    // Fold balance
    std::mt19937_64 rng(99);
    bool balanced = true;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 80)(rng);
        std::vector<int> labels(n);
        for (auto& l : labels) l = std::bernoulli_distribution(0.35)(rng);
        labels[0] = 0;
        labels[1] = 1;
        const int k = std::uniform_int_distribution<int>(2, 10)(rng);
        const auto folds = crossval::stratified_folds(labels, k, static_cast<std::uint64_t>(trial));
        for (int c = 0; c < 2; ++c) {
            std::vector<int> counts(static_cast<std::size_t>(k), 0);
            for (std::size_t i = 0; i < n; ++i)
                if (labels[i] == c) ++counts[static_cast<std::size_t>(folds[i])];
            balanced = balanced && *std::max_element(counts.begin(), counts.end()) -
                                           *std::min_element(counts.begin(), counts.end()) <= 1;
        }
    }
    o.require(balanced, "stratified folds unbalanced");

    // CLI artifacts are byte-identical across repeated runs.
    const fs::path root = fs::temp_directory_path() / "genefilter_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    dataio::save_dataset(data, root / "m.tsv", root / "l.tsv");
    auto run_all = [&](const fs::path& out) {
        const std::vector<std::string> io{"--matrix", (root / "m.tsv").string(), "--labels", (root / "l.tsv").string(),
                                          "--out", out.string(), "--seed", "5"};
        auto with = [&](std::vector<std::string> head) {
            head.insert(head.end(), io.begin(), io.end());
            return head;
        };
        std::ostringstream sink;
        int status = 0;
        status |= cli::run_command(with({"optimize-fgf", "--population", "8", "--generations", "3"}), sink, sink);
        status |= cli::run_command(with({"rank", "--method", "wilcoxon"}), sink, sink);
        status |= cli::run_command(
            with({"evaluate", "--method", "fgf,ttest,wilcoxon,roc", "--classifier", "svm,mlp", "--k-max", "3"}), sink, sink);
        status |= cli::run_command({"report", "--out", out.string()}, sink, sink);
        return status;
    };
    const int s1 = run_all(root / "a");
    const int s2 = run_all(root / "b");
    o.require(s1 == 0 && s2 == 0, "CLI pipeline failed");
    std::size_t files = 0, identical = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json") continue;
        ++files;
        const fs::path twin = root / "b" / name;
        identical += fs::exists(twin) && textio::read_file(entry.path()) == textio::read_file(twin);
    }
    o.require(files > 0 && files == identical, "CLI artifacts differ between runs");
    fs::remove_all(root);
    o.detail << "accuracy multiples of 1/n: " << (multiples ? "yes" : "no") << "; 500 fold layouts balanced: "
             << (balanced ? "yes" : "no") << "; " << identical << "/" << files << " CLI artifacts byte-identical";
}

} // namespace

int main() {
    std::cout << std::setprecision(10);
    criterion("anova_reproduction", 1.0, anova_reproduction);
    criterion("statistical_test_oracles", 10.0, statistical_oracles);
    criterion("fuzzy_engine", 5.0, fuzzy_engine);
    criterion("genetic_algorithm", 120.0, ga_suite);
    criterion("classifiers", 30.0, classifier_suite);
    criterion("end_to_end_planted_benchmark", 600.0, end_to_end);
    criterion("protocol_invariants", 60.0, protocol_invariants);
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << std::endl;
    return g_failures == 0 ? 0 : 1;
}
