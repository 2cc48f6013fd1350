#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

#include "robadd/design.hpp"
#include "robadd/dpd.hpp"
#include "robadd/errors.hpp"
#include "robadd/penalty.hpp"

namespace robadd {

/// Which fixed-point form drives the sigma^2 refresh. FixedPoint is derived
/// directly from the scale estimating equation and zeroes it at convergence;
/// PaperLiteral keeps the printed normalization for comparison.
enum class SigmaUpdateRule { FixedPoint, PaperLiteral };

struct FitConfig {
  int max_outer_iters = 200;
  int max_cd_passes = 1;
  double tol_beta = 1e-6;    // relative coefficient change
  double tol_sigma2 = 1e-6;  // relative sigma^2 change
  double ridge_eps = 1e-10;  // diagonal jitter for near-singular weighted Grams
  double sigma2_floor_rel = 1e-8;  // floor = rel * variance(y)
  double sigma_damping = 0.5;
  SigmaUpdateRule sigma_update = SigmaUpdateRule::FixedPoint;
  bool refresh_intercept = true;          // re-estimate mu every outer pass
  bool randomize_group_order = false;
  std::uint64_t group_order_seed = 0;

  void validate() const;
};

struct ModelFit {
  Coefficients coef;
  double sigma2 = 1.0;
  double nu = 0.0;
  std::vector<int> active_set;  // groups with nonzero coefficient blocks
  SplineBasis basis;
  Eigen::VectorXd column_means;
  ColumnScaling scaling;
  std::optional<PenaltySpec> penalty;
  std::vector<double> objective_trace;
  bool converged = false;
  int iterations = 0;

  ModelFit() : basis(KnotVector::equally_spaced(0, 4)) {}

  double objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
  int num_groups() const { return static_cast<int>(coef.beta.size()) / std::max(basis.dim(), 1); }
};

/// Intercept-only MDPDE: weighted mean alternated with the scale update.
struct NullFit {
  double mu = 0.0;
  double sigma2 = 1.0;
  bool converged = false;
};
NullFit fit_intercept_only(const Eigen::VectorXd& y, double nu, const FitConfig& config = {});

/// Unpenalized MDPDE by iteratively reweighted least squares on the full
/// design. Never throws on plain non-convergence; the returned fit carries
/// the flag. Throws NumericalError if the weighted system stays singular
/// after jitter.
ModelFit fit_unpenalized(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                         const FitConfig& config = {});

/// One damped fixed-point step for sigma^2 given residuals and the current
/// weights, clipped below at sigma2_floor. At nu = 0 this is the exact
/// mean squared residual.
double update_sigma2(const Eigen::VectorXd& residuals, const Eigen::VectorXd& weights,
                     double sigma2_old, double nu, double sigma2_floor = 0.0,
                     double damping = 0.5, SigmaUpdateRule rule = SigmaUpdateRule::FixedPoint);

/// Penalized MDPDE by blockwise coordinate descent. Each outer iteration
/// fixes the DPD weights (majorize), runs proximal steps over the groups in
/// the Gram-norm metric, then refreshes mu, the weights, and sigma^2. The
/// objective (DPD data term plus group penalty in the D_j norms) never
/// increases across a full pass.
ModelFit fit_penalized(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                       const PenaltySpec& penalty, const FitConfig& config = {},
                       const ModelFit* warm_start = nullptr);

/// Cholesky transform R with (Z_j R^{-1})^T W (Z_j R^{-1}) = I.
struct GroupTransform {
  Eigen::MatrixXd forward;  // R
  Eigen::MatrixXd inverse;  // R^{-1}
};
GroupTransform standardize_group(const Eigen::MatrixXd& Zj, const Eigen::VectorXd& weights,
                                 double ridge_eps = 1e-10);

/// Fitted values and per-component curves for new raw covariates.
struct Prediction {
  Eigen::VectorXd yhat;
  Eigen::MatrixXd components;  // n_new x p, column j = g_j(x_j)
  std::int64_t clamped = 0;    // inputs outside the training range
};
Prediction predict(const ModelFit& fit, const Eigen::MatrixXd& X_raw);

/// Smallest lambda that keeps every group at zero, computed from the group
/// gradient norms (in the Gram-metric) at the intercept-only model.
double lambda_max(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                  const FitConfig& config = {});

/// Scale floor used by the fits: sigma2_floor_rel * variance(y).
double sigma2_floor(const Eigen::VectorXd& y, const FitConfig& config = {});

}  // namespace robadd
