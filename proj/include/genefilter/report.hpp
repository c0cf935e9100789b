#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "genefilter/crossval.hpp"

namespace genefilter::report {

// "96.1% (9)": accuracy as a percentage with one decimal, best gene count in parentheses.
std::string format_accuracy_cell(double accuracy, Index best_k);

// Rows are classifiers, columns ranking methods (fixed enum order, only those present).
std::string format_summary_tsv(const std::vector<SweepResult>& results);

// Long format "method<TAB>classifier<TAB>accuracy", one row per result.
std::string format_boxplot_tsv(const std::vector<SweepResult>& results);

// Best accuracies grouped by ranking method, in enum order.
std::vector<std::vector<double>> accuracy_groups(const std::vector<SweepResult>& results);

// Writes summary.tsv and boxplot_data.tsv, plus anova.json when `anova` is set.
void emit_report(const std::vector<SweepResult>& results, const std::optional<AnovaResult>& anova,
                 const std::filesystem::path& out_dir);

} // namespace genefilter::report
