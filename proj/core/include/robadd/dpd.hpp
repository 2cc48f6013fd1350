#pragma once

#include <Eigen/Core>

#include "robadd/design.hpp"
#include "robadd/penalty.hpp"

namespace robadd {

/// Robustness parameter nu >= 0 and model scale sigma^2 > 0.
struct DpdParams {
  double nu = 0.0;
  double sigma2 = 1.0;

  void validate() const;
};

/// Intercept plus stacked spline coefficients (group j at beta[j*m .. j*m+m-1]).
struct Coefficients {
  double mu = 0.0;
  Eigen::VectorXd beta;

  Eigen::VectorXd stacked() const;  // [mu; beta]
  static Coefficients from_stacked(const Eigen::VectorXd& v);
};

/// N(0, sigma^2) density at `residual`, evaluated in log space.
double normal_density(double residual, double sigma2);
double normal_log_density(double residual, double sigma2);

/// Per-observation DPD loss for nu > 0:
///   V = (2*pi)^(-nu/2) sigma^(-nu) (1+nu)^(-1/2) - (1+nu)/nu * f^nu.
/// The constant c(nu) is dropped throughout.
double v_term(double residual, const DpdParams& params);

/// f_i^nu for every observation; weights below 1e-300 are flushed to zero.
/// nu = 0 gives all ones.
Eigen::VectorXd dpd_weights(const Eigen::VectorXd& residuals, const DpdParams& params);

/// (1/n) sum V_i for nu > 0, or the negative mean Gaussian log-likelihood
/// for nu = 0.
double dpd_data_objective(const Eigen::VectorXd& residuals, const DpdParams& params);

/// Full objective: data term plus, when given, sum_j P_lambda(||beta_j||_{D_j})
/// with the Gram norms from the design.
double dpd_objective(const Coefficients& coef, const DpdParams& params,
                     const CenteredDesign& design, const Eigen::VectorXd& y,
                     const PenaltySpec* penalty = nullptr);

/// Analytic gradient of the unpenalized objective with respect to (mu, beta),
/// length p*m+1 with the intercept first.
Eigen::VectorXd dpd_gradient_beta(const Coefficients& coef, const DpdParams& params,
                                  const CenteredDesign& design, const Eigen::VectorXd& y);

/// Analytic derivative of the unpenalized objective with respect to sigma^2.
double dpd_gradient_sigma2(const Coefficients& coef, const DpdParams& params,
                           const CenteredDesign& design, const Eigen::VectorXd& y);

/// Left-hand side of the sigma^2 estimating equation at the given residuals:
///   -n*nu*(2*pi*sigma^2)^(-nu/2)*(1+nu)^(-3/2) + sum (1 - r_i^2/sigma^2) f_i^nu.
/// Proportional to the sigma^2 gradient; zero at the scale fixed point.
double sigma2_estimating_equation(const Eigen::VectorXd& residuals, const DpdParams& params);

}  // namespace robadd
