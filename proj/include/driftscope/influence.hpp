#pragma once

#include "driftscope/binarize.hpp"
#include "driftscope/dataset.hpp"
#include "driftscope/parallel.hpp"
#include "driftscope/rashomon.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftscope {

struct LogisticOptions {
    double l2 = 1e-2;
    double tol = 1e-10;          // on the gradient norm of the regularized objective
    std::size_t max_iter = 100;
    // Weight class c by N / (2 N_c) so both classes carry equal total weight.
    bool class_weights = false;
    // When false a non-converged fit is returned with converged = false instead of throwing.
    bool require_convergence = true;
};

// Logistic regression over theta = (w, b):
//   mean_i c_{y_i} * logloss(y_i, sigmoid(w.x_i + b)) + (l2 / 2) * |theta|^2
struct LogisticModel {
    Eigen::VectorXd theta;      // weights followed by the intercept
    double l2 = 0.0;
    std::array<double, 2> class_weight{1.0, 1.0};
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace; // objective after every accepted step, starting at theta = 0

    std::size_t n_features() const noexcept { return static_cast<std::size_t>(theta.size()) - 1; }
    double intercept() const { return theta[theta.size() - 1]; }
    double predict_proba(std::span<const double> x) const;
    double accuracy(const RowMatrix& x, const std::vector<int>& y) const;
};

LogisticModel fit_logistic(const RowMatrix& x, const std::vector<int>& y, const LogisticOptions& options = {});

// Regularized objective at theta (for diagnostics and finite-difference checks).
double logistic_objective(const RowMatrix& x, const std::vector<int>& y, const Eigen::VectorXd& theta, double l2,
                          const std::array<double, 2>& class_weight = {1.0, 1.0});

// Mean (class-weighted) log-loss of the model on a dataset, without the penalty.
double logistic_loss(const LogisticModel& model, const RowMatrix& x, const std::vector<int>& y);

// Influence of every training row on the test loss:
//   I(z_i) = (1/N_test) sum_j grad L(z_j)^T H^{-1} grad L(z_i)
// with H the Hessian of the regularized training objective at the fitted theta.
// Positive means removing z_i increases the test loss. H is factorized once.
std::vector<double> influence_scores_serial(const LogisticModel& model, const RowMatrix& train_x,
                                            const std::vector<int>& train_y, const RowMatrix& test_x,
                                            const std::vector<int>& test_y);
std::vector<double> influence_scores_omp(const LogisticModel& model, const RowMatrix& train_x,
                                         const std::vector<int>& train_y, const RowMatrix& test_x,
                                         const std::vector<int>& test_y);
std::vector<double> influence_scores(const LogisticModel& model, const RowMatrix& train_x,
                                     const std::vector<int>& train_y, const RowMatrix& test_x,
                                     const std::vector<int>& test_y, Exec exec = Exec::automatic);

// Refits without each training row and returns L_test(theta_without_row) - L_test(theta).
// Same sign convention as influence_scores.
std::vector<double> loo_retrain_oracle(const RowMatrix& train_x, const std::vector<int>& train_y,
                                       const RowMatrix& test_x, const std::vector<int>& test_y,
                                       const LogisticOptions& options = {}, Exec exec = Exec::automatic);

// (|g_d - g_dp| - |g_d - g_rest|) / |g_d - g_dp| in the l2 norm.
double alignment(std::span<const double> g_d, std::span<const double> g_dp, std::span<const double> g_dp_minus_s);

// Indices of the k largest scores, ties by ascending index.
std::vector<std::size_t> top_k(const std::vector<double>& scores, std::size_t k);

struct InfluenceOptions {
    std::size_t k = 50;
    LogisticOptions logistic;
    EnsembleConfig ensemble;      // shared by the D, D' and D' \ S ensembles
    std::size_t background_rows = 128;
    Exec exec = Exec::automatic;
};

struct InfluenceReport {
    std::vector<double> scores_dp;         // influence of every D' row (the ones eligible for selection)
    std::vector<double> scores_d;          // influence of every D row, exported only
    std::vector<std::size_t> selected;     // D' row ids, highest score first
    double discriminator_accuracy = 0.0;   // on the membership-labelled LiFIM set
    LogisticModel model;
    ImportanceVector gifim_d;
    ImportanceVector gifim_dp;
    ImportanceVector gifim_dp_minus_s;
    std::optional<double> alignment;       // empty when GiFIM(D) equals GiFIM(D')
    std::string alignment_note;
};

struct MembershipInfluence {
    LogisticModel model;
    double accuracy = 0.0;
    std::vector<double> scores_d;
    std::vector<double> scores_dp;
};

// Discriminator on the stacked LiFIMs (D rows labelled 1, D' rows 0) and the
// influence of every row with the whole stacked set as the test set.
MembershipInfluence membership_influence(const RowMatrix& lifim_d, const RowMatrix& lifim_dp,
                                         const LogisticOptions& logistic, Exec exec = Exec::automatic);

// Membership discriminator on LiFIMs (D rows labelled 1, D' rows 0), influence of
// every row against the whole LiFIM set as the test set, the K most influential
// D' rows, and the alignment after refitting an ensemble on D' without them.
// Both raw datasets are binarized with the given scheme; LiFIMs and GiFIMs are
// summed back onto the source columns.
InfluenceReport top_k_influential(const TabularDataset& d, const TabularDataset& d_prime,
                                  const BinarizationScheme& scheme, const InfluenceOptions& options);

// Same, starting from LiFIM matrices already computed. rest_gifim receives the
// D' row ids that remain and returns their GiFIM.
InfluenceReport top_k_from_lifims(const RowMatrix& lifim_d, const RowMatrix& lifim_dp,
                                  const std::function<ImportanceVector(const std::vector<std::size_t>&)>& rest_gifim,
                                  const InfluenceOptions& options);

} // namespace driftscope
