#include "driftscope/embedding.hpp"

#include "driftscope/error.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace driftscope {

Embedding pca_embedding(const RowMatrix& x) {
    if (x.rows() < 2) fail(ErrorKind::TooFewRows, "PCA needs at least two rows");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::Index m = cov.rows();
    Eigen::MatrixXd axes = Eigen::MatrixXd::Zero(m, 2);
    Embedding out;
    out.method = "pca";
    out.note = "linear PCA fallback, not PaCMAP; distances between far-apart groups are not comparable";
    const double total = eig.eigenvalues().sum();
    for (Eigen::Index c = 0; c < std::min<Eigen::Index>(2, m); ++c) {
        Eigen::VectorXd v = eig.eigenvectors().col(m - 1 - c);   // eigenvalues ascend
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        axes.col(c) = v;
        out.explained_variance.push_back(total > 0 ? eig.eigenvalues()[m - 1 - c] / total : 0.0);
    }
    out.coords = centered * axes;
    return out;
}

Embedding load_embedding(const std::filesystem::path& path, std::size_t expected_rows) {
    const auto data = load_csv(path);
    const auto xi = data.column_index("x"), yi = data.column_index("y");
    if (!xi || !yi) fail(ErrorKind::MissingColumn, fmt::format("embedding file {} needs columns x and y", path.string()));
    if (data.rows() != expected_rows)
        fail(ErrorKind::DimensionMismatch, fmt::format("embedding file {} has {} rows, expected {}", path.string(), data.rows(), expected_rows));
    Embedding out;
    out.method = "precomputed";
    out.note = fmt::format("coordinates read from {}", path.filename().string());
    out.coords.resize(static_cast<Eigen::Index>(expected_rows), 2);
    for (std::size_t i = 0; i < expected_rows; ++i) {
        out.coords(static_cast<Eigen::Index>(i), 0) = data.at(i, *xi);
        out.coords(static_cast<Eigen::Index>(i), 1) = data.at(i, *yi);
    }
    return out;
}

} // namespace driftscope
