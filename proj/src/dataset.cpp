#include "driftscope/dataset.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace driftscope {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

} // namespace

TabularDataset::TabularDataset(RowMatrix features, std::vector<ColumnMeta> columns,
                               std::optional<std::vector<int>> labels)
    : features_(std::move(features)), columns_(std::move(columns)), labels_(std::move(labels)) {
    if (columns_.size() != cols()) {
        fail(ErrorKind::SchemaMismatch,
             fmt::format("{} column descriptors for {} feature columns", columns_.size(), cols()));
    }
    if (labels_ && labels_->size() != rows()) {
        fail(ErrorKind::SchemaMismatch, fmt::format("{} labels for {} rows", labels_->size(), rows()));
    }
    if (labels_) {
        for (std::size_t i = 0; i < labels_->size(); ++i) {
            int y = (*labels_)[i];
            if (y != 0 && y != 1) fail(ErrorKind::ParseError, fmt::format("label {} at row {} is not 0/1", y, i));
        }
    }
    for (std::size_t j = 0; j < cols(); ++j) {
        for (std::size_t i = 0; i < rows(); ++i) {
            double v = at(i, j);
            if (!std::isfinite(v)) {
                fail(ErrorKind::ParseError, fmt::format("non-finite value at row {}, column '{}'", i, columns_[j].name));
            }
            if (columns_[j].kind == ColumnKind::binary && v != 0.0 && v != 1.0) {
                fail(ErrorKind::SchemaMismatch,
                     fmt::format("binary column '{}' holds {} at row {}", columns_[j].name, v, i));
            }
        }
    }
}

TabularDataset TabularDataset::from_matrix(RowMatrix features, std::vector<std::string> names,
                                           std::optional<std::vector<int>> labels) {
    if (names.size() != static_cast<std::size_t>(features.cols())) {
        fail(ErrorKind::SchemaMismatch, "column name count does not match feature columns");
    }
    std::vector<ColumnMeta> meta;
    meta.reserve(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        Eigen::VectorXd col = features.col(static_cast<Eigen::Index>(j));
        meta.push_back({std::move(names[j]), infer_kind({col.data(), static_cast<std::size_t>(col.size())})});
    }
    return TabularDataset(std::move(features), std::move(meta), std::move(labels));
}

std::vector<std::string> TabularDataset::column_names() const {
    std::vector<std::string> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
}

std::optional<std::size_t> TabularDataset::column_index(std::string_view name) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].name == name) return j;
    }
    return std::nullopt;
}

const std::vector<int>& TabularDataset::labels() const {
    if (!labels_) fail(ErrorKind::UnlabeledDataset, "dataset has no labels");
    return *labels_;
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> row_ids) const {
    RowMatrix out(static_cast<Eigen::Index>(row_ids.size()), features_.cols());
    std::optional<std::vector<int>> y;
    if (labels_) y.emplace();
    for (std::size_t r = 0; r < row_ids.size(); ++r) {
        if (row_ids[r] >= rows()) fail(ErrorKind::IndexOutOfRange, fmt::format("row {} of {}", row_ids[r], rows()));
        out.row(static_cast<Eigen::Index>(r)) = features_.row(static_cast<Eigen::Index>(row_ids[r]));
        if (y) y->push_back((*labels_)[row_ids[r]]);
    }
    TabularDataset result;
    result.features_ = std::move(out);
    result.columns_ = columns_;
    result.labels_ = std::move(y);
    return result;
}

TabularDataset TabularDataset::without_rows(std::span<const std::size_t> row_ids) const {
    std::vector<char> drop(rows(), 0);
    for (auto id : row_ids) {
        if (id >= rows()) fail(ErrorKind::IndexOutOfRange, fmt::format("row {} of {}", id, rows()));
        drop[id] = 1;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rows(); ++i) {
        if (!drop[i]) keep.push_back(i);
    }
    return subset(keep);
}

TabularDataset TabularDataset::with_labels(std::optional<std::vector<int>> labels) const {
    return TabularDataset(features_, columns_, std::move(labels));
}

ColumnKind infer_kind(std::span<const double> values) {
    for (double v : values) {
        if (v != 0.0 && v != 1.0) return ColumnKind::continuous;
    }
    return ColumnKind::binary;
}

TabularDataset concat(const TabularDataset& a, const TabularDataset& b) {
    if (a.cols() != b.cols() || a.column_names() != b.column_names()) {
        fail(ErrorKind::SchemaMismatch, "cannot concatenate datasets with different columns");
    }
    RowMatrix out(static_cast<Eigen::Index>(a.rows() + b.rows()), static_cast<Eigen::Index>(a.cols()));
    if (a.rows() > 0) out.topRows(static_cast<Eigen::Index>(a.rows())) = a.features();
    if (b.rows() > 0) out.bottomRows(static_cast<Eigen::Index>(b.rows())) = b.features();
    std::vector<ColumnMeta> meta = a.columns();
    for (std::size_t j = 0; j < meta.size(); ++j) {
        if (b.columns()[j].kind != ColumnKind::binary) meta[j].kind = ColumnKind::continuous;
    }
    std::optional<std::vector<int>> y;
    if (a.has_labels() && b.has_labels()) {
        y = a.labels();
        y->insert(y->end(), b.labels().begin(), b.labels().end());
    }
    return TabularDataset(std::move(out), std::move(meta), std::move(y));
}

TabularDataset parse_csv(std::string_view text, const std::optional<std::string>& label_column,
                         std::string_view source) {
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            auto pos = text.find('\n', start);
            auto line = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
            if (!trim(line).empty()) lines.push_back(line);
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    }
    if (lines.empty()) fail(ErrorKind::ParseError, fmt::format("{}: missing header row", source));

    auto header = split_fields(lines.front());
    std::vector<std::string> names;
    for (auto h : header) names.emplace_back(trim(h));
    {
        std::unordered_set<std::string> seen;
        for (const auto& n : names) {
            if (n.empty()) fail(ErrorKind::ParseError, fmt::format("{}: empty column name in header", source));
            if (!seen.insert(n).second) fail(ErrorKind::ParseError, fmt::format("{}: duplicate column '{}'", source, n));
        }
    }

    std::optional<std::size_t> label_idx;
    if (label_column) {
        auto it = std::find(names.begin(), names.end(), *label_column);
        if (it == names.end()) {
            fail(ErrorKind::MissingColumn, fmt::format("{}: label column '{}' not found", source, *label_column));
        }
        label_idx = static_cast<std::size_t>(it - names.begin());
    }

    const std::size_t width = names.size();
    const std::size_t n_rows = lines.size() - 1;
    const std::size_t n_features = width - (label_idx ? 1 : 0);
    RowMatrix features(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
    std::optional<std::vector<int>> labels;
    if (label_idx) labels.emplace(n_rows, 0);

    for (std::size_t r = 0; r < n_rows; ++r) {
        auto fields = split_fields(lines[r + 1]);
        if (fields.size() != width) {
            fail(ErrorKind::ParseError, fmt::format("{}: row {} has {} fields, expected {}", source, r + 1,
                                                    fields.size(), width));
        }
        std::size_t out_col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            auto cell = trim(fields[c]);
            auto value = parse_double(cell);
            if (!value) {
                fail(ErrorKind::ParseError, fmt::format("{}: row {}, column '{}': cannot parse '{}' as a number",
                                                        source, r + 1, names[c], cell));
            }
            if (label_idx && c == *label_idx) {
                if (*value != 0.0 && *value != 1.0) {
                    fail(ErrorKind::ParseError, fmt::format("{}: row {}, label column '{}' holds {} (expected 0 or 1)",
                                                            source, r + 1, names[c], cell));
                }
                (*labels)[r] = static_cast<int>(*value);
            } else {
                features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out_col++)) = *value;
            }
        }
    }
    if (label_idx) names.erase(names.begin() + static_cast<std::ptrdiff_t>(*label_idx));
    return TabularDataset::from_matrix(std::move(features), std::move(names), std::move(labels));
}

TabularDataset load_csv(const std::filesystem::path& path, const std::optional<std::string>& label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::ParseError, fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), label_column, path.string());
}

std::string format_number(double value) {
    if (value == 0.0) return "0";
    return fmt::format("{}", value);
}

std::string to_csv(const TabularDataset& data, std::string_view label_column) {
    std::string out;
    auto names = data.column_names();
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j) out += ',';
        out += names[j];
    }
    if (data.has_labels()) {
        if (!names.empty()) out += ',';
        out += label_column;
    }
    out += '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j) {
            if (j) out += ',';
            out += format_number(data.at(i, j));
        }
        if (data.has_labels()) {
            if (data.cols() > 0) out += ',';
            out += std::to_string(data.label(i));
        }
        out += '\n';
    }
    return out;
}

void write_csv(const TabularDataset& data, const std::filesystem::path& path, std::string_view label_column) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::ParseError, fmt::format("cannot write '{}'", path.string()));
    out << to_csv(data, label_column);
}

} // namespace driftscope
