#include "robadd/diagnostics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "robadd/errors.hpp"

namespace robadd {

namespace {

// Penalty curvature block for an active group, from the fitted penalty and
// the group's Gram matrix:
//   P'(h)/h * D  +  (P''(h)/h^2 - P'(h)/h^3) * (D b)(D b)^T,  h = ||b||_D.
// P'' is the a.e. derivative; h is nudged off the exact breakpoints.
Eigen::MatrixXd penalty_curvature_block(const Eigen::VectorXd& beta_j, const Eigen::MatrixXd& D,
                                        const PenaltySpec& spec) {
  double h = gram_norm(beta_j, D);
  const double lam = spec.lambda;
  const double a = spec.shape;
  const double eps = 1e-8;
  std::vector<double> breaks;
  if (spec.kind == PenaltyKind::Scad) breaks = {lam, a * lam};
  if (spec.kind == PenaltyKind::Mcp) breaks = {a * lam};
  for (double b : breaks) {
    if (std::abs(h - b) < eps) h = b + eps;
  }
  const double p1 = penalty_derivative(h, spec);
  const double p2 = penalty_second_derivative(h, spec);
  const Eigen::VectorXd Db = D * beta_j;
  return (p1 / h) * D + (p2 / (h * h) - p1 / (h * h * h)) * (Db * Db.transpose());
}

}  // namespace

InfluenceReport influence_at(const ModelFit& fit, const CenteredDesign& design,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& x0_raw, double y0) {
  if (y.size() != design.n) throw std::invalid_argument("influence_at: dimension mismatch");
  const int d = design.num_coef();
  const int m = design.m;
  const double nu = fit.nu;
  const double s2 = fit.sigma2;
  const double c = (1.0 + nu) / s2;
  const double n = static_cast<double>(design.n);

  Eigen::VectorXd r = y - design.Z * fit.coef.stacked();
  const Eigen::VectorXd w = dpd_weights(r, DpdParams{nu, s2});

  // Contamination-point design row through the stored prediction pipeline.
  Eigen::MatrixXd x0_mat = x0_raw.transpose();
  const Eigen::VectorXd z0 =
      make_design_rows(x0_mat, fit.basis, fit.column_means, fit.scaling).row(0).transpose();
  const double r0 = y0 - z0.dot(fit.coef.stacked());
  const double f0nu = nu == 0.0 ? 1.0 : std::exp(nu * normal_log_density(r0, s2));

  // bracket = c * ( E_n[f^nu r Z] - f0^nu r0 Z0 )
  Eigen::VectorXd e_term = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd s_expect = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < design.n; ++i) {
    const Eigen::VectorXd zi = design.Z.row(i).transpose();
    e_term.noalias() += (w[i] * r[i]) * zi;
    const double curv = w[i] * (nu * r[i] * r[i] / s2 - 1.0);
    s_expect.noalias() += curv * (zi * zi.transpose());
  }
  e_term /= n;
  s_expect /= n;

  Eigen::VectorXd bracket = c * (e_term - f0nu * r0 * z0);
  Eigen::VectorXd y0_term_rhs = c * (f0nu * r0 * z0);

  // S = c * E_n[f^nu (nu r^2/sigma^2 - 1) Z Z^T] - penalty curvature blocks
  Eigen::MatrixXd S = c * s_expect;
  if (fit.penalty.has_value() && fit.penalty->lambda > 0.0) {
    for (int j : fit.active_set) {
      const Eigen::VectorXd bj = fit.coef.beta.segment(j * m, m);
      const Eigen::MatrixXd block = penalty_curvature_block(bj, design.gram[j], *fit.penalty);
      S.block(design.group_offset(j), design.group_offset(j), m, m) -= block;
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues().maxCoeff();
  const double smin = svd.singularValues().minCoeff();
  InfluenceReport report;
  report.x0 = x0_raw;
  report.y0 = y0;
  report.s_condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(smin > smax * 1e-14)) {
    throw NumericalError("influence S matrix is singular; condition estimate " +
                         std::to_string(report.s_condition));
  }
  report.if_vector = svd.solve(bracket);
  report.if_norm = report.if_vector.norm();
  report.y0_term_norm = svd.solve(y0_term_rhs).norm();
  const double bnorm = bracket.norm();
  report.solve_residual = (S * report.if_vector - bracket).norm() / std::max(bnorm, 1e-300);
  return report;
}

std::vector<InfluenceReport> influence_sweep(const ModelFit& fit, const CenteredDesign& design,
                                             const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& x0_raw,
                                             const std::vector<double>& y0_values) {
  std::vector<InfluenceReport> out;
  out.reserve(y0_values.size());
  for (double y0 : y0_values) out.push_back(influence_at(fit, design, y, x0_raw, y0));
  return out;
}

double sample_quantile(Eigen::VectorXd values, double prob) {
  if (values.size() == 0) throw std::invalid_argument("quantile of empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("quantile prob outside [0,1]");
  std::sort(values.data(), values.data() + values.size());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ResidualSummary residual_summary(const ModelFit& fit, const CenteredDesign& design,
                                 const Eigen::VectorXd& y) {
  if (y.size() != design.n) throw std::invalid_argument("residual_summary: dimension mismatch");
  ResidualSummary out;
  const double sigma_hat = std::sqrt(fit.sigma2);
  out.standardized = (y - design.Z * fit.coef.stacked()) / sigma_hat;
  for (Eigen::Index i = 0; i < out.standardized.size(); ++i) {
    const double a = std::abs(out.standardized[i]);
    if (a > 2.0) ++out.beyond_two;
    if (a > 3.0) ++out.beyond_three;
  }
  out.q1 = sample_quantile(out.standardized, 0.25);
  out.median = sample_quantile(out.standardized, 0.5);
  out.q3 = sample_quantile(out.standardized, 0.75);
  const double iqr = out.q3 - out.q1;
  const double lo_fence = out.q1 - 1.5 * iqr;
  const double hi_fence = out.q3 + 1.5 * iqr;
  // Tukey whiskers: most extreme observations inside the fences.
  double lo = out.q1, hi = out.q3;
  for (Eigen::Index i = 0; i < out.standardized.size(); ++i) {
    const double v = out.standardized[i];
    if (v >= lo_fence && v < lo) lo = v;
    if (v <= hi_fence && v > hi) hi = v;
    if (v < lo_fence || v > hi_fence) ++out.n_outliers;
  }
  out.lo_whisker = lo;
  out.hi_whisker = hi;
  return out;
}

}  // namespace robadd
