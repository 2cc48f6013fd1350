#pragma once

#include <Eigen/Core>
#include <vector>

#include "robadd/design.hpp"
#include "robadd/solver.hpp"

namespace robadd {

/// Empirical influence of point contamination at (x0, y0) on the coefficient
/// functional, at fixed fitted scale. Expectations are sample averages over
/// the training data.
struct InfluenceReport {
  Eigen::VectorXd x0;
  double y0 = 0.0;
  Eigen::VectorXd if_vector;   // length p*m + 1
  double if_norm = 0.0;
  double y0_term_norm = 0.0;   // norm of the contamination-point part alone
  double s_condition = 0.0;    // condition number of the S matrix
  double solve_residual = 0.0; // ||S*IF - b|| / ||b||
};

InfluenceReport influence_at(const ModelFit& fit, const CenteredDesign& design,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& x0_raw, double y0);

/// ||IF|| along a y0 sweep at fixed x0.
std::vector<InfluenceReport> influence_sweep(const ModelFit& fit, const CenteredDesign& design,
                                             const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& x0_raw,
                                             const std::vector<double>& y0_values);

/// Standardized residuals with threshold counts and a Tukey five-number
/// box-plot summary (1.5 IQR whiskers).
struct ResidualSummary {
  Eigen::VectorXd standardized;  // r_i / sigma_hat
  int beyond_two = 0;
  int beyond_three = 0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double lo_whisker = 0.0, hi_whisker = 0.0;
  int n_outliers = 0;  // outside the whiskers
};

ResidualSummary residual_summary(const ModelFit& fit, const CenteredDesign& design,
                                 const Eigen::VectorXd& y);

/// Linear-interpolation sample quantile (R type 7) of unsorted data.
double sample_quantile(Eigen::VectorXd values, double prob);

}  // namespace robadd
