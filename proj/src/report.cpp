#include "genefilter/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "genefilter/textio.hpp"

namespace genefilter::report {

namespace {

constexpr RankingMethod kMethodOrder[] = {RankingMethod::fgf, RankingMethod::ttest, RankingMethod::wilcoxon,
                                          RankingMethod::roc};
constexpr ClassifierKind kClassifierOrder[] = {ClassifierKind::knn, ClassifierKind::svm, ClassifierKind::nbc,
                                               ClassifierKind::mlp};

void require_results(const std::vector<SweepResult>& results) {
    if (results.empty()) throw InvalidInput("report: no sweep results");
}

} // namespace

std::string format_accuracy_cell(double accuracy, Index best_k) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.1f%% (%td)", 100.0 * accuracy, best_k);
    return buffer;
}

std::string format_summary_tsv(const std::vector<SweepResult>& results) {
    require_results(results);
    std::map<std::pair<ClassifierKind, RankingMethod>, const SweepResult*> cells;
    for (const auto& r : results) {
        if (!cells.emplace(std::pair{r.classifier, r.method}, &r).second)
            throw InvalidInput("report: duplicate result for " + std::string(to_string(r.method)) + "/" +
                               std::string(to_string(r.classifier)));
    }
    std::vector<RankingMethod> methods;
    for (RankingMethod m : kMethodOrder) {
        if (std::any_of(results.begin(), results.end(), [&](const SweepResult& r) { return r.method == m; })) methods.push_back(m);
    }

    std::string out = "classifier";
    for (RankingMethod m : methods) {
        out += '\t';
        out += to_string(m);
    }
    out += '\n';
    for (ClassifierKind c : kClassifierOrder) {
        if (std::none_of(results.begin(), results.end(), [&](const SweepResult& r) { return r.classifier == c; })) continue;
        out += to_string(c);
        for (RankingMethod m : methods) {
            out += '\t';
            const auto it = cells.find({c, m});
            out += it == cells.end() ? "NA" : format_accuracy_cell(it->second->best_accuracy, it->second->best_k);
        }
        out += '\n';
    }
    return out;
}

std::string format_boxplot_tsv(const std::vector<SweepResult>& results) {
    require_results(results);
    std::string out = "method\tclassifier\taccuracy\n";
    for (RankingMethod m : kMethodOrder) {
        for (ClassifierKind c : kClassifierOrder) {
            for (const auto& r : results) {
                if (r.method != m || r.classifier != c) continue;
                out += to_string(m);
                out += '\t';
                out += to_string(c);
                out += '\t';
                out += textio::format_double(r.best_accuracy);
                out += '\n';
            }
        }
    }
    return out;
}

std::vector<std::vector<double>> accuracy_groups(const std::vector<SweepResult>& results) {
    std::vector<std::vector<double>> groups;
    for (RankingMethod m : kMethodOrder) {
        std::vector<double> group;
        for (ClassifierKind c : kClassifierOrder) {
            for (const auto& r : results) {
                if (r.method == m && r.classifier == c) group.push_back(r.best_accuracy);
            }
        }
        if (!group.empty()) groups.push_back(std::move(group));
    }
    return groups;
}

void emit_report(const std::vector<SweepResult>& results, const std::optional<AnovaResult>& anova,
                 const std::filesystem::path& out_dir) {
    require_results(results);
    std::filesystem::create_directories(out_dir);
    textio::write_file_atomic(out_dir / "summary.tsv", format_summary_tsv(results));
    textio::write_file_atomic(out_dir / "boxplot_data.tsv", format_boxplot_tsv(results));
    if (anova) textio::write_file_atomic(out_dir / "anova.json", crossval::format_anova_json(*anova));
}

} // namespace genefilter::report
