#include "robadd/dpd.hpp"

#include <cmath>
#include <stdexcept>

namespace robadd {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kWeightFloor = 1e-300;
}  // namespace

void DpdParams::validate() const {
  if (!(nu >= 0.0)) throw std::invalid_argument("nu must be >= 0");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw std::invalid_argument("sigma2 must be positive and finite");
  }
}

Eigen::VectorXd Coefficients::stacked() const {
  Eigen::VectorXd v(beta.size() + 1);
  v[0] = mu;
  v.tail(beta.size()) = beta;
  return v;
}

Coefficients Coefficients::from_stacked(const Eigen::VectorXd& v) {
  Coefficients c;
  c.mu = v[0];
  c.beta = v.tail(v.size() - 1);
  return c;
}

double normal_log_density(double residual, double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("sigma2 must be > 0");
  return -0.5 * std::log(kTwoPi * sigma2) - residual * residual / (2.0 * sigma2);
}

double normal_density(double residual, double sigma2) {
  return std::exp(normal_log_density(residual, sigma2));
}

double v_term(double residual, const DpdParams& params) {
  params.validate();
  if (!(params.nu > 0.0)) {
    throw std::invalid_argument("v_term requires nu > 0; use the log-likelihood branch at nu = 0");
  }
  const double nu = params.nu;
  const double lead = std::pow(kTwoPi * params.sigma2, -0.5 * nu) / std::sqrt(1.0 + nu);
  const double fnu = std::exp(nu * normal_log_density(residual, params.sigma2));
  return lead - (1.0 + nu) / nu * fnu;
}

Eigen::VectorXd dpd_weights(const Eigen::VectorXd& residuals, const DpdParams& params) {
  params.validate();
  const double nu = params.nu;
  if (nu == 0.0) return Eigen::VectorXd::Ones(residuals.size());
  Eigen::VectorXd w(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double v = std::exp(nu * normal_log_density(residuals[i], params.sigma2));
    w[i] = v < kWeightFloor ? 0.0 : v;
  }
  return w;
}

double dpd_data_objective(const Eigen::VectorXd& residuals, const DpdParams& params) {
  params.validate();
  const Eigen::Index n = residuals.size();
  if (n == 0) throw std::invalid_argument("empty residual vector");
  if (params.nu == 0.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc -= normal_log_density(residuals[i], params.sigma2);
    return acc / static_cast<double>(n);
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += v_term(residuals[i], params);
  return acc / static_cast<double>(n);
}

double dpd_objective(const Coefficients& coef, const DpdParams& params,
                     const CenteredDesign& design, const Eigen::VectorXd& y,
                     const PenaltySpec* penalty) {
  if (coef.beta.size() != design.p * design.m || y.size() != design.n) {
    throw std::invalid_argument("dpd_objective: dimension mismatch");
  }
  Eigen::VectorXd residuals = y;
  residuals.array() -= coef.mu;
  residuals.noalias() -= design.Z.rightCols(design.p * design.m) * coef.beta;
  double value = dpd_data_objective(residuals, params);
  if (penalty != nullptr) {
    for (int j = 0; j < design.p; ++j) {
      const double t = gram_norm(coef.beta.segment(j * design.m, design.m), design.gram[j]);
      value += penalty_value(t, *penalty);
    }
  }
  return value;
}

Eigen::VectorXd dpd_gradient_beta(const Coefficients& coef, const DpdParams& params,
                                  const CenteredDesign& design, const Eigen::VectorXd& y) {
  params.validate();
  const int n = design.n;
  Eigen::VectorXd residuals = y;
  residuals.array() -= coef.mu;
  residuals.noalias() -= design.Z.rightCols(design.p * design.m) * coef.beta;
  const Eigen::VectorXd w = dpd_weights(residuals, params);
  const double scale = (1.0 + params.nu) / (static_cast<double>(n) * params.sigma2);
  // -(1+nu)/(n sigma^2) * Z^T (W o r); at nu = 0 this is the LS gradient.
  return -scale * (design.Z.transpose() * (w.array() * residuals.array()).matrix());
}

double sigma2_estimating_equation(const Eigen::VectorXd& residuals, const DpdParams& params) {
  params.validate();
  const double nu = params.nu;
  const double s2 = params.sigma2;
  const double n = static_cast<double>(residuals.size());
  const Eigen::VectorXd w = dpd_weights(residuals, params);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    acc += (1.0 - residuals[i] * residuals[i] / s2) * w[i];
  }
  const double lead = n * nu * std::pow(kTwoPi * s2, -0.5 * nu) / std::pow(1.0 + nu, 1.5);
  return -lead + acc;
}

double dpd_gradient_sigma2(const Coefficients& coef, const DpdParams& params,
                           const CenteredDesign& design, const Eigen::VectorXd& y) {
  params.validate();
  const int n = design.n;
  Eigen::VectorXd residuals = y;
  residuals.array() -= coef.mu;
  residuals.noalias() -= design.Z.rightCols(design.p * design.m) * coef.beta;
  if (params.nu == 0.0) {
    const double mean_sq = residuals.squaredNorm() / static_cast<double>(n);
    return 0.5 / params.sigma2 - 0.5 * mean_sq / (params.sigma2 * params.sigma2);
  }
  // d/d sigma^2 of (1/n) sum V_i equals the estimating equation scaled by
  // (1+nu)/(2 n sigma^2).
  const double scale = (1.0 + params.nu) / (2.0 * static_cast<double>(n) * params.sigma2);
  return scale * sigma2_estimating_equation(residuals, params);
}

}  // namespace robadd
