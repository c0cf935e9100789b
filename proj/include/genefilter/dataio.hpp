#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "genefilter/common.hpp"

namespace genefilter {

// Expression matrix (genes x samples) with binary class labels.
//
// Class 1 is the second distinct class name encountered in the labels file.
struct Dataset {
    Matrix matrix;
    std::vector<std::string> gene_ids;
    std::vector<std::string> sample_ids;
    std::vector<int> labels;
    std::array<std::string, 2> class_names;

    Index gene_count() const { return matrix.rows(); }
    Index sample_count() const { return matrix.cols(); }
    Index class_size(int cls) const;

    // Throws InvalidInput when a structural invariant does not hold.
    void validate() const;

    // Column subset in the given order; the result is validated.
    Dataset select_samples(std::span<const Index> columns) const;

    // Same data with classes 0 and 1 exchanged (labels flipped, class names swapped).
    Dataset with_swapped_classes() const;

    // Values of gene `row` split by class, in sample order.
    std::array<std::vector<double>, 2> split_by_class(Index row) const;
};

namespace dataio {

Dataset load_dataset(const std::filesystem::path& matrix_path, const std::filesystem::path& labels_path);

// Parsers behind load_dataset; `source` names the input in error messages.
Dataset parse_dataset(std::string_view matrix_text, std::string_view labels_text,
                      const std::string& matrix_source = "matrix", const std::string& labels_source = "labels");

std::string format_matrix_tsv(const Dataset& dataset);
std::string format_labels_tsv(const Dataset& dataset);
void save_dataset(const Dataset& dataset, const std::filesystem::path& matrix_path,
                  const std::filesystem::path& labels_path);

// Columns are samples. Each column's sorted values are replaced by the rank-wise
// mean (or median) across columns; tied values share the mean reference value
// over their rank span.
Matrix quantile_normalize(const Matrix& matrix, bool use_median);

// Rows scaled to mean 0 and sample standard deviation 1. A zero row variance
// is raised by kVarianceFloor, so constant rows map to zeros.
Matrix standardize_genes(const Matrix& matrix);

} // namespace dataio
} // namespace genefilter
