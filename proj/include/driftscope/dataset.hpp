#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace driftscope {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ColumnKind { continuous, binary };

struct ColumnMeta {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;

    bool operator==(const ColumnMeta&) const = default;
};

// Feature matrix with named columns and optional binary labels. Immutable after
// construction; the constructor rejects non-finite cells, non-binary values in
// binary columns and labels outside {0, 1}.
class TabularDataset {
public:
    TabularDataset() = default;
    TabularDataset(RowMatrix features, std::vector<ColumnMeta> columns,
                   std::optional<std::vector<int>> labels = std::nullopt);

    // Builds column metadata by inference: a column is binary iff its values are a subset of {0, 1}.
    static TabularDataset from_matrix(RowMatrix features, std::vector<std::string> names,
                                      std::optional<std::vector<int>> labels = std::nullopt);

    std::size_t rows() const noexcept { return static_cast<std::size_t>(features_.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(features_.cols()); }
    bool empty() const noexcept { return rows() == 0; }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * cols(), cols()};
    }
    double at(std::size_t i, std::size_t j) const { return features_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }

    const RowMatrix& features() const noexcept { return features_; }
    const std::vector<ColumnMeta>& columns() const noexcept { return columns_; }
    std::vector<std::string> column_names() const;
    std::optional<std::size_t> column_index(std::string_view name) const;

    bool has_labels() const noexcept { return labels_.has_value(); }
    const std::vector<int>& labels() const;
    int label(std::size_t i) const { return labels().at(i); }

    TabularDataset subset(std::span<const std::size_t> row_ids) const;
    TabularDataset without_rows(std::span<const std::size_t> row_ids) const;
    TabularDataset with_labels(std::optional<std::vector<int>> labels) const;

private:
    RowMatrix features_;
    std::vector<ColumnMeta> columns_;
    std::optional<std::vector<int>> labels_;
};

ColumnKind infer_kind(std::span<const double> values);

// Stacks the rows of b under a. Column names must agree; a binary column stays
// binary only if it is binary in both inputs. Labels are kept only if both have them.
TabularDataset concat(const TabularDataset& a, const TabularDataset& b);

TabularDataset parse_csv(std::string_view text, const std::optional<std::string>& label_column,
                         std::string_view source = "<memory>");
TabularDataset load_csv(const std::filesystem::path& path,
                        const std::optional<std::string>& label_column = std::nullopt);

// Numbers are written in shortest round-trip form so load(write(d)) == d exactly.
std::string to_csv(const TabularDataset& data, std::string_view label_column = "label");
void write_csv(const TabularDataset& data, const std::filesystem::path& path,
               std::string_view label_column = "label");

std::string format_number(double value);

} // namespace driftscope
