#include "genefilter/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "genefilter/textio.hpp"

namespace genefilter {

Index Dataset::class_size(int cls) const {
    return static_cast<Index>(std::count(labels.begin(), labels.end(), cls));
}

void Dataset::validate() const {
    if (matrix.rows() == 0 || matrix.cols() == 0) throw InvalidInput("dataset: empty expression matrix");
    if (static_cast<Index>(gene_ids.size()) != matrix.rows())
        throw InvalidInput("dataset: gene id count " + std::to_string(gene_ids.size()) + " != matrix rows " +
                           std::to_string(matrix.rows()));
    if (static_cast<Index>(labels.size()) != matrix.cols())
        throw InvalidInput("dataset: label count " + std::to_string(labels.size()) + " != matrix columns " +
                           std::to_string(matrix.cols()));
    if (!sample_ids.empty() && static_cast<Index>(sample_ids.size()) != matrix.cols())
        throw InvalidInput("dataset: sample id count does not match matrix columns");
    for (int label : labels) {
        if (label != 0 && label != 1) throw InvalidInput("dataset: labels must be 0 or 1");
    }
    for (int cls = 0; cls < 2; ++cls) {
        if (class_size(cls) < 2) {
            const std::string& name = class_names[cls].empty() ? std::to_string(cls) : class_names[cls];
            throw InvalidInput("dataset: class '" + name + "' has fewer than 2 samples");
        }
    }
    if (!matrix.allFinite()) throw InvalidInput("dataset: matrix contains non-finite values");
}

Dataset Dataset::select_samples(std::span<const Index> columns) const {
    Dataset out;
    out.matrix.resize(matrix.rows(), static_cast<Index>(columns.size()));
    out.gene_ids = gene_ids;
    out.class_names = class_names;
    out.labels.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const Index c = columns[j];
        if (c < 0 || c >= matrix.cols()) throw InvalidInput("select_samples: column index out of range");
        out.matrix.col(static_cast<Index>(j)) = matrix.col(c);
        out.labels.push_back(labels[static_cast<std::size_t>(c)]);
        if (!sample_ids.empty()) out.sample_ids.push_back(sample_ids[static_cast<std::size_t>(c)]);
    }
    out.validate();
    return out;
}

Dataset Dataset::with_swapped_classes() const {
    Dataset out = *this;
    for (int& label : out.labels) label = 1 - label;
    std::swap(out.class_names[0], out.class_names[1]);
    return out;
}

std::array<std::vector<double>, 2> Dataset::split_by_class(Index row) const {
    std::array<std::vector<double>, 2> groups;
    groups[0].reserve(static_cast<std::size_t>(class_size(0)));
    groups[1].reserve(static_cast<std::size_t>(class_size(1)));
    for (Index j = 0; j < matrix.cols(); ++j) {
        groups[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])].push_back(matrix(row, j));
    }
    return groups;
}

namespace dataio {

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> lines = textio::split(text, '\n');
    for (auto& line : lines) {
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

} // namespace

Dataset parse_dataset(std::string_view matrix_text, std::string_view labels_text, const std::string& matrix_source,
                      const std::string& labels_source) {
    Dataset dataset;

    const auto matrix_lines = lines_of(matrix_text);
    if (matrix_lines.empty()) throw ParseError(matrix_source, 1, 1, "empty matrix file");
    const auto header = textio::split(matrix_lines.front(), '\t');
    if (header.size() < 2) throw ParseError(matrix_source, 1, 2, "header has no sample columns");
    const std::size_t n_samples = header.size() - 1;
    std::unordered_set<std::string> seen_samples;
    for (std::size_t j = 1; j < header.size(); ++j) {
        std::string id(header[j]);
        if (id.empty()) throw ParseError(matrix_source, 1, j + 1, "empty sample id");
        if (!seen_samples.insert(id).second) throw ParseError(matrix_source, 1, j + 1, "duplicate sample id '" + id + "'");
        dataset.sample_ids.push_back(std::move(id));
    }

    const std::size_t n_genes = matrix_lines.size() - 1;
    if (n_genes == 0) throw ParseError(matrix_source, 2, 1, "matrix has no gene rows");
    dataset.matrix.resize(static_cast<Index>(n_genes), static_cast<Index>(n_samples));
    dataset.gene_ids.reserve(n_genes);
    for (std::size_t i = 0; i < n_genes; ++i) {
        const std::size_t row = i + 2;
        const auto fields = textio::split(matrix_lines[i + 1], '\t');
        if (fields.size() != header.size())
            throw ParseError(matrix_source, row, std::min(fields.size(), header.size()) + 1,
                             "dimension mismatch: expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
        if (fields[0].empty()) throw ParseError(matrix_source, row, 1, "empty gene id");
        dataset.gene_ids.emplace_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            const auto value = textio::parse_double(fields[j]);
            if (!value) {
                const std::string why = fields[j].empty() ? "blank cell" : "non-numeric cell '" + std::string(fields[j]) + "'";
                throw ParseError(matrix_source, row, j + 1, why);
            }
            dataset.matrix(static_cast<Index>(i), static_cast<Index>(j - 1)) = *value;
        }
    }

    std::unordered_map<std::string, std::size_t> sample_index;
    for (std::size_t j = 0; j < dataset.sample_ids.size(); ++j) sample_index.emplace(dataset.sample_ids[j], j);

    std::vector<int> labels(n_samples, -1);
    std::vector<std::string> class_names;
    const auto label_lines = lines_of(labels_text);
    for (std::size_t i = 0; i < label_lines.size(); ++i) {
        const std::size_t row = i + 1;
        if (label_lines[i].empty()) continue;
        const auto fields = textio::split(label_lines[i], '\t');
        if (fields.size() != 2) throw ParseError(labels_source, row, 1, "expected 'sample_id<TAB>class_name'");
        const std::string sample(fields[0]);
        const std::string cls(fields[1]);
        if (cls.empty()) throw ParseError(labels_source, row, 2, "empty class name");
        const auto it = sample_index.find(sample);
        if (it == sample_index.end()) throw ParseError(labels_source, row, 1, "unknown sample id '" + sample + "'");
        if (labels[it->second] != -1) throw ParseError(labels_source, row, 1, "duplicate label for sample '" + sample + "'");
        auto cls_it = std::find(class_names.begin(), class_names.end(), cls);
        if (cls_it == class_names.end()) {
            if (class_names.size() == 2) throw ParseError(labels_source, row, 2, "more than two classes");
            class_names.push_back(cls);
            cls_it = class_names.end() - 1;
        }
        labels[it->second] = static_cast<int>(cls_it - class_names.begin());
    }
    for (std::size_t j = 0; j < n_samples; ++j) {
        if (labels[j] == -1) throw InvalidInput(labels_source + ": no label for sample '" + dataset.sample_ids[j] + "'");
    }
    if (class_names.size() != 2) throw InvalidInput(labels_source + ": expected exactly two classes");

    dataset.labels = std::move(labels);
    dataset.class_names = {class_names[0], class_names[1]};
    dataset.validate();
    return dataset;
}

Dataset load_dataset(const std::filesystem::path& matrix_path, const std::filesystem::path& labels_path) {
    return parse_dataset(textio::read_file(matrix_path), textio::read_file(labels_path), matrix_path.string(),
                         labels_path.string());
}

std::string format_matrix_tsv(const Dataset& dataset) {
    std::string out = "gene_id";
    for (Index j = 0; j < dataset.sample_count(); ++j) {
        out += '\t';
        out += dataset.sample_ids.empty() ? "S" + std::to_string(j + 1) : dataset.sample_ids[static_cast<std::size_t>(j)];
    }
    out += '\n';
    for (Index i = 0; i < dataset.gene_count(); ++i) {
        out += dataset.gene_ids[static_cast<std::size_t>(i)];
        for (Index j = 0; j < dataset.sample_count(); ++j) {
            out += '\t';
            out += textio::format_double(dataset.matrix(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string format_labels_tsv(const Dataset& dataset) {
    std::string out;
    for (Index j = 0; j < dataset.sample_count(); ++j) {
        out += dataset.sample_ids.empty() ? "S" + std::to_string(j + 1) : dataset.sample_ids[static_cast<std::size_t>(j)];
        out += '\t';
        out += dataset.class_names[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(j)])];
        out += '\n';
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& matrix_path,
                  const std::filesystem::path& labels_path) {
    textio::write_file_atomic(matrix_path, format_matrix_tsv(dataset));
    textio::write_file_atomic(labels_path, format_labels_tsv(dataset));
}

Matrix quantile_normalize(const Matrix& matrix, bool use_median) {
    const Index n_rows = matrix.rows();
    const Index n_cols = matrix.cols();
    if (n_rows == 0 || n_cols == 0) throw InvalidInput("quantile_normalize: empty matrix");
    if (!matrix.allFinite()) throw InvalidInput("quantile_normalize: non-finite entries");

    std::vector<std::vector<Index>> order(static_cast<std::size_t>(n_cols));
    Matrix sorted(n_rows, n_cols);
    for (Index c = 0; c < n_cols; ++c) {
        auto& idx = order[static_cast<std::size_t>(c)];
        idx.resize(static_cast<std::size_t>(n_rows));
        std::iota(idx.begin(), idx.end(), Index{0});
        std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) { return matrix(a, c) < matrix(b, c); });
        for (Index r = 0; r < n_rows; ++r) sorted(r, c) = matrix(idx[static_cast<std::size_t>(r)], c);
    }

    Vector reference(n_rows);
    std::vector<double> row_values(static_cast<std::size_t>(n_cols));
    for (Index r = 0; r < n_rows; ++r) {
        if (!use_median) {
            reference(r) = sorted.row(r).mean();
            continue;
        }
        for (Index c = 0; c < n_cols; ++c) row_values[static_cast<std::size_t>(c)] = sorted(r, c);
        std::sort(row_values.begin(), row_values.end());
        const std::size_t mid = row_values.size() / 2;
        reference(r) = row_values.size() % 2 == 1 ? row_values[mid] : 0.5 * (row_values[mid - 1] + row_values[mid]);
    }

    Matrix out(n_rows, n_cols);
    for (Index c = 0; c < n_cols; ++c) {
        const auto& idx = order[static_cast<std::size_t>(c)];
        Index start = 0;
        while (start < n_rows) {
            Index end = start + 1;
            while (end < n_rows && sorted(end, c) == sorted(start, c)) ++end;
            const double value = end - start == 1 ? reference(start) : reference.segment(start, end - start).mean();
            for (Index r = start; r < end; ++r) out(idx[static_cast<std::size_t>(r)], c) = value;
            start = end;
        }
    }
    return out;
}

Matrix standardize_genes(const Matrix& matrix) {
    Matrix out(matrix.rows(), matrix.cols());
    const Index n = matrix.cols();
    for (Index i = 0; i < matrix.rows(); ++i) {
        if (matrix.row(i).maxCoeff() == matrix.row(i).minCoeff()) {
            out.row(i).setZero();
            continue;
        }
        const double mean = matrix.row(i).mean();
        double variance = 0.0;
        if (n > 1) variance = (matrix.row(i).array() - mean).square().sum() / static_cast<double>(n - 1);
        if (variance == 0.0) variance += kVarianceFloor;
        out.row(i) = (matrix.row(i).array() - mean) / std::sqrt(variance);
    }
    return out;
}

} // namespace dataio
} // namespace genefilter
