#include "driftscope/influence.hpp"

#include "driftscope/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace driftscope {

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// -log p(y | z) computed without overflow.
double log_loss(int y, double z) { return std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - y * z; }

double linear(const RowMatrix& x, Eigen::Index i, const Eigen::VectorXd& theta) {
    const Eigen::Index m = x.cols();
    double z = theta[m];
    for (Eigen::Index j = 0; j < m; ++j) z += x(i, j) * theta[j];
    return z;
}

void check_xy(const RowMatrix& x, const std::vector<int>& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        fail(ErrorKind::DimensionMismatch, fmt::format("{} rows but {} labels", x.rows(), y.size()));
    }
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v != 0 && v != 1) fail(ErrorKind::InvalidArgument, "labels must be 0 or 1");
        (v == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) fail(ErrorKind::SingleClass, "logistic regression needs both classes");
}

struct Derivatives {
    double objective = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

Derivatives derivatives(const RowMatrix& x, const std::vector<int>& y, const Eigen::VectorXd& theta, double l2,
                        const std::array<double, 2>& cw, bool with_hessian) {
    const Eigen::Index m = x.cols();
    const auto n = static_cast<double>(x.rows());
    Derivatives d;
    d.gradient = Eigen::VectorXd::Zero(m + 1);
    if (with_hessian) d.hessian = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd xt(m + 1);
    // Compensated sum: near the optimum Newton steps change the objective by
    // about one ulp, well below the error of a plain running sum.
    double sum = 0.0, carry = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        xt.head(m) = x.row(i).transpose();
        xt[m] = 1.0;
        const int yi = y[static_cast<std::size_t>(i)];
        const double w = cw[static_cast<std::size_t>(yi)];
        const double z = linear(x, i, theta);
        const double p = sigmoid(z);
        const double term = w * log_loss(yi, z);
        const double t = sum + term;
        carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        d.gradient.noalias() += (w * (p - yi)) * xt;
        if (with_hessian) d.hessian.selfadjointView<Eigen::Lower>().rankUpdate(xt, w * p * (1.0 - p));
    }
    d.objective = (sum + carry) / n + 0.5 * l2 * theta.squaredNorm();
    d.gradient = d.gradient / n + l2 * theta;
    if (with_hessian) {
        d.hessian = d.hessian.selfadjointView<Eigen::Lower>();
        d.hessian /= n;
        d.hessian.diagonal().array() += l2;
    }
    return d;
}

std::array<double, 2> balanced_weights(const std::vector<int>& y) {
    double n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    double n0 = static_cast<double>(y.size()) - n1;
    double n = static_cast<double>(y.size());
    return {n / (2.0 * n0), n / (2.0 * n1)};
}

LogisticModel newton(const RowMatrix& x, const std::vector<int>& y, const LogisticOptions& opt,
                     const std::array<double, 2>& cw, Eigen::VectorXd theta) {
    LogisticModel model;
    model.l2 = opt.l2;
    model.class_weight = cw;
    auto d = derivatives(x, y, theta, opt.l2, cw, true);
    model.objective_trace.push_back(d.objective);
    std::size_t it = 0;
    for (; it < opt.max_iter && d.gradient.norm() > opt.tol; ++it) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(d.hessian);
        if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
            fail(ErrorKind::SingularHessian, "Hessian of the logistic objective is not positive definite");
        }
        const Eigen::VectorXd step = ldlt.solve(-d.gradient);
        const double slope = d.gradient.dot(step);
        const double gnorm = d.gradient.norm();
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            Eigen::VectorXd cand = theta + t * step;
            auto c = derivatives(x, y, cand, opt.l2, cw, false);
            const bool armijo = c.objective <= d.objective + 1e-4 * t * slope;
            // Near the optimum the objective stops resolving; accept steps that
            // leave it unchanged up to rounding and still shrink the gradient.
            const bool flat = c.objective <= d.objective + 1e-15 * std::abs(d.objective) && c.gradient.norm() < gnorm;
            if (armijo || flat) {
                theta = std::move(cand);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        d = derivatives(x, y, theta, opt.l2, cw, true);
        model.objective_trace.push_back(d.objective);
    }
    model.theta = std::move(theta);
    model.iterations = it;
    model.gradient_norm = d.gradient.norm();
    model.converged = model.gradient_norm <= opt.tol;
    if (!model.converged && opt.require_convergence) {
        fail(ErrorKind::NonConvergence, fmt::format("logistic fit stopped after {} iterations with gradient norm {:.3e} (tol {:.1e})",
                                                    model.iterations, model.gradient_norm, opt.tol));
    }
    return model;
}

} // namespace

double LogisticModel::predict_proba(std::span<const double> x) const {
    if (x.size() != n_features()) fail(ErrorKind::DimensionMismatch, "row width differs from the model");
    double z = intercept();
    for (std::size_t j = 0; j < x.size(); ++j) z += theta[static_cast<Eigen::Index>(j)] * x[j];
    return sigmoid(z);
}

double LogisticModel::accuracy(const RowMatrix& x, const std::vector<int>& y) const {
    if (y.empty()) fail(ErrorKind::EmptyDataset, "accuracy of an empty set");
    std::size_t hit = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int pred = linear(x, i, theta) > 0.0 ? 1 : 0;
        hit += pred == y[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(hit) / static_cast<double>(y.size());
}

LogisticModel fit_logistic(const RowMatrix& x, const std::vector<int>& y, const LogisticOptions& options) {
    check_xy(x, y);
    if (!(options.l2 >= 0.0)) fail(ErrorKind::InvalidArgument, "l2 must be non-negative");
    const auto cw = options.class_weights ? balanced_weights(y) : std::array<double, 2>{1.0, 1.0};
    return newton(x, y, options, cw, Eigen::VectorXd::Zero(x.cols() + 1));
}

double logistic_objective(const RowMatrix& x, const std::vector<int>& y, const Eigen::VectorXd& theta, double l2,
                          const std::array<double, 2>& class_weight) {
    return derivatives(x, y, theta, l2, class_weight, false).objective;
}

double logistic_loss(const LogisticModel& model, const RowMatrix& x, const std::vector<int>& y) {
    if (x.rows() == 0) fail(ErrorKind::EmptyDataset, "loss over an empty set");
    return derivatives(x, y, model.theta, 0.0, model.class_weight, false).objective;
}

namespace {

Eigen::VectorXd example_gradient(const LogisticModel& model, const RowMatrix& x, const std::vector<int>& y, Eigen::Index i) {
    const Eigen::Index m = x.cols();
    const int yi = y[static_cast<std::size_t>(i)];
    const double coef = model.class_weight[static_cast<std::size_t>(yi)] * (sigmoid(linear(x, i, model.theta)) - yi);
    Eigen::VectorXd g(m + 1);
    g.head(m) = coef * x.row(i).transpose();
    g[m] = coef;
    return g;
}

Eigen::VectorXd prepare(const LogisticModel& model, const RowMatrix& train_x, const std::vector<int>& train_y,
                        const RowMatrix& test_x, const std::vector<int>& test_y) {
    if (test_x.rows() == 0) fail(ErrorKind::EmptyDataset, "influence needs a nonempty test set");
    if (static_cast<std::size_t>(train_x.cols()) != model.n_features() || test_x.cols() != train_x.cols()) {
        fail(ErrorKind::DimensionMismatch, "train/test width differs from the model");
    }
    if (static_cast<std::size_t>(train_x.rows()) != train_y.size() || static_cast<std::size_t>(test_x.rows()) != test_y.size()) {
        fail(ErrorKind::DimensionMismatch, "one label per row is required");
    }
    auto d = derivatives(train_x, train_y, model.theta, model.l2, model.class_weight, true);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(d.hessian);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
        fail(ErrorKind::SingularHessian, "Hessian is singular; use l2 > 0");
    }
    Eigen::VectorXd mean_test = Eigen::VectorXd::Zero(train_x.cols() + 1);
    for (Eigen::Index j = 0; j < test_x.rows(); ++j) mean_test += example_gradient(model, test_x, test_y, j);
    mean_test /= static_cast<double>(test_x.rows());
    return ldlt.solve(mean_test);
}

} // namespace

std::vector<double> influence_scores_serial(const LogisticModel& model, const RowMatrix& train_x,
                                            const std::vector<int>& train_y, const RowMatrix& test_x,
                                            const std::vector<int>& test_y) {
    const Eigen::VectorXd v = prepare(model, train_x, train_y, test_x, test_y);
    std::vector<double> out(static_cast<std::size_t>(train_x.rows()));
    for (Eigen::Index i = 0; i < train_x.rows(); ++i) out[static_cast<std::size_t>(i)] = v.dot(example_gradient(model, train_x, train_y, i));
    return out;
}

std::vector<double> influence_scores_omp(const LogisticModel& model, const RowMatrix& train_x,
                                         const std::vector<int>& train_y, const RowMatrix& test_x,
                                         const std::vector<int>& test_y) {
    const Eigen::VectorXd v = prepare(model, train_x, train_y, test_x, test_y);
    std::vector<double> out(static_cast<std::size_t>(train_x.rows()));
    omp_for(train_x.rows(), [&](std::ptrdiff_t i) {
        out[static_cast<std::size_t>(i)] = v.dot(example_gradient(model, train_x, train_y, i));
    });
    return out;
}

std::vector<double> influence_scores(const LogisticModel& model, const RowMatrix& train_x,
                                     const std::vector<int>& train_y, const RowMatrix& test_x,
                                     const std::vector<int>& test_y, Exec exec) {
    return resolve(exec) == Exec::omp ? influence_scores_omp(model, train_x, train_y, test_x, test_y)
                                      : influence_scores_serial(model, train_x, train_y, test_x, test_y);
}

std::vector<double> loo_retrain_oracle(const RowMatrix& train_x, const std::vector<int>& train_y,
                                       const RowMatrix& test_x, const std::vector<int>& test_y,
                                       const LogisticOptions& options, Exec exec) {
    const LogisticModel full = fit_logistic(train_x, train_y, options);
    const double base = logistic_loss(full, test_x, test_y);
    const auto n = static_cast<std::size_t>(train_x.rows());
    std::vector<double> out(n);
    auto one = [&](std::size_t i) {
        RowMatrix x(train_x.rows() - 1, train_x.cols());
        std::vector<int> y;
        y.reserve(n - 1);
        for (std::size_t r = 0, k = 0; r < n; ++r) {
            if (r == i) continue;
            x.row(static_cast<Eigen::Index>(k++)) = train_x.row(static_cast<Eigen::Index>(r));
            y.push_back(train_y[r]);
        }
        check_xy(x, y);
        // Class weights stay those of the full fit so only the row itself is removed.
        auto refit = newton(x, y, options, full.class_weight, full.theta);
        out[i] = logistic_loss(refit, test_x, test_y) - base;
    };
    if (resolve(exec) == Exec::omp) {
        omp_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) { one(static_cast<std::size_t>(i)); });
    } else {
        for (std::size_t i = 0; i < n; ++i) one(i);
    }
    return out;
}

double alignment(std::span<const double> g_d, std::span<const double> g_dp, std::span<const double> g_dp_minus_s) {
    if (g_d.size() != g_dp.size() || g_d.size() != g_dp_minus_s.size()) {
        fail(ErrorKind::DimensionMismatch, "GiFIMs differ in length");
    }
    double before = 0.0, after = 0.0;
    for (std::size_t j = 0; j < g_d.size(); ++j) {
        before += (g_d[j] - g_dp[j]) * (g_d[j] - g_dp[j]);
        after += (g_d[j] - g_dp_minus_s[j]) * (g_d[j] - g_dp_minus_s[j]);
    }
    before = std::sqrt(before);
    after = std::sqrt(after);
    if (before == 0.0) fail(ErrorKind::IdenticalGifims, "GiFIM(D) equals GiFIM(D'); alignment is undefined");
    return (before - after) / before;
}

std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k) {
    if (k > scores.size()) fail(ErrorKind::InvalidArgument, fmt::format("K = {} exceeds the {} candidates", k, scores.size()));
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(k);
    return order;
}

MembershipInfluence membership_influence(const RowMatrix& lifim_d, const RowMatrix& lifim_dp,
                                         const LogisticOptions& logistic, Exec exec) {
    if (lifim_d.rows() == 0 || lifim_dp.rows() == 0) fail(ErrorKind::EmptyDataset, "both datasets need rows");
    if (lifim_d.cols() != lifim_dp.cols()) fail(ErrorKind::DimensionMismatch, "LiFIM widths differ");
    const auto n = lifim_d.rows(), np = lifim_dp.rows();
    RowMatrix x(n + np, lifim_d.cols());
    x.topRows(n) = lifim_d;
    x.bottomRows(np) = lifim_dp;
    std::vector<int> y(static_cast<std::size_t>(n + np), 0);
    std::fill(y.begin(), y.begin() + n, 1);

    MembershipInfluence m;
    m.model = fit_logistic(x, y, logistic);
    m.accuracy = m.model.accuracy(x, y);
    auto all = influence_scores(m.model, x, y, x, y, exec);
    m.scores_d.assign(all.begin(), all.begin() + n);
    m.scores_dp.assign(all.begin() + n, all.end());
    return m;
}

InfluenceReport top_k_from_lifims(const RowMatrix& lifim_d, const RowMatrix& lifim_dp,
                                  const std::function<ImportanceVector(const std::vector<std::size_t>&)>& rest_gifim,
                                  const InfluenceOptions& options) {
    if (lifim_d.rows() == 0 || lifim_dp.rows() == 0) fail(ErrorKind::EmptyDataset, "both datasets need rows");
    if (options.k < 1) fail(ErrorKind::InvalidArgument, "K must be at least 1");
    const auto np = lifim_dp.rows();
    if (options.k > static_cast<std::size_t>(np)) {
        fail(ErrorKind::InvalidArgument, fmt::format("K = {} exceeds the {} rows of D'", options.k, np));
    }
    auto m = membership_influence(lifim_d, lifim_dp, options.logistic, options.exec);
    InfluenceReport r;
    r.model = std::move(m.model);
    r.discriminator_accuracy = m.accuracy;
    r.scores_d = std::move(m.scores_d);
    r.scores_dp = std::move(m.scores_dp);
    r.selected = top_k(r.scores_dp, options.k);

    r.gifim_d.values = column_mean(lifim_d);
    r.gifim_d.kind = ImportanceKind::gifim;
    r.gifim_d.subject = "D";
    r.gifim_dp.values = column_mean(lifim_dp);
    r.gifim_dp.kind = ImportanceKind::gifim;
    r.gifim_dp.subject = "D'";

    std::vector<char> picked(static_cast<std::size_t>(np), 0);
    for (auto i : r.selected) picked[i] = 1;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < picked.size(); ++i) {
        if (!picked[i]) rest.push_back(i);
    }
    if (rest.empty()) fail(ErrorKind::EmptyRemainder, "every row of D' was selected; GiFIM of the remainder is undefined");
    r.gifim_dp_minus_s = rest_gifim(rest);
    r.gifim_dp_minus_s.subject = "D' \\ S";
    try {
        r.alignment = alignment(r.gifim_d.values, r.gifim_dp.values, r.gifim_dp_minus_s.values);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::IdenticalGifims) throw;
        r.alignment_note = "GiFIM(D) equals GiFIM(D'): there is no gap to align";
    }
    return r;
}

InfluenceReport top_k_influential(const TabularDataset& d, const TabularDataset& d_prime,
                                  const BinarizationScheme& scheme, const InfluenceOptions& options) {
    if (d.empty() || d_prime.empty()) fail(ErrorKind::EmptyDataset, "both datasets need rows");
    if (options.k > d_prime.rows()) {
        fail(ErrorKind::InvalidArgument, fmt::format("K = {} exceeds the {} rows of D'", options.k, d_prime.rows()));
    }
    auto imp_d = IntrinsicImportance::fit(d, scheme, options.ensemble, options.background_rows, options.exec, &d);
    auto imp_dp = IntrinsicImportance::fit(d_prime, scheme, options.ensemble, options.background_rows, options.exec, &d);
    const RowMatrix lifim_d = imp_d.batch_source(d, options.exec);
    const RowMatrix lifim_dp = imp_dp.batch_source(d_prime, options.exec);
    auto rest_gifim = [&](const std::vector<std::size_t>& rest) {
        auto rest_data = d_prime.subset(rest);
        auto imp = IntrinsicImportance::fit(rest_data, scheme, options.ensemble, options.background_rows, options.exec, &d);
        ImportanceVector g;
        g.values = column_mean(imp.batch_source(rest_data, options.exec));
        g.kind = ImportanceKind::gifim;
        g.feature_names = d.column_names();
        return g;
    };
    auto r = top_k_from_lifims(lifim_d, lifim_dp, rest_gifim, options);
    r.gifim_d.feature_names = d.column_names();
    r.gifim_dp.feature_names = d.column_names();
    return r;
}

} // namespace driftscope
