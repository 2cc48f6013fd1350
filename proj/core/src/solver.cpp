#include "robadd/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>

namespace robadd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_dims(const CenteredDesign& design, const Eigen::VectorXd& y) {
  if (y.size() != design.n) throw std::invalid_argument("response length does not match design");
  if (!y.allFinite()) throw std::invalid_argument("response contains non-finite values");
}

double median_of(Eigen::VectorXd v) {
  const Eigen::Index n = v.size();
  std::nth_element(v.data(), v.data() + n / 2, v.data() + n);
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.data(), v.data() + n / 2 - 1, v.data() + n);
  return 0.5 * (hi + v[n / 2 - 1]);
}

double variance_of(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(v.size() - 1));
}

double sigma2_floor_for(const Eigen::VectorXd& y, const FitConfig& config) {
  return std::max(config.sigma2_floor_rel * variance_of(y), 1e-30);
}

// Robust starting scale: squared normalized MAD about the median.
double initial_sigma2(const Eigen::VectorXd& y, double mu0, double floor) {
  Eigen::VectorXd dev = (y.array() - mu0).abs();
  const double mad = median_of(dev);
  const double s2 = 1.4826 * 1.4826 * mad * mad;
  if (s2 > floor && std::isfinite(s2)) return s2;
  const double var = variance_of(y);
  return std::max(var, std::max(floor, 1e-12));
}

Eigen::VectorXd solve_spd_with_jitter(Eigen::MatrixXd A, const Eigen::VectorXd& b,
                                      double ridge_eps) {
  const double scale = std::max(A.diagonal().maxCoeff(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd Aj = A;
    if (jitter > 0.0) Aj.diagonal().array() += jitter;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Aj);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd x = ldlt.solve(b);
      const double resid = (Aj * x - b).norm();
      if (x.allFinite() && resid <= 1e-8 * std::max(1.0, b.norm()) + 1e-12) return x;
    }
    jitter = jitter == 0.0 ? std::max(ridge_eps * scale, 1e-14 * scale) : jitter * 100.0;
    if (jitter > 1e-2 * scale) break;
  }
  throw NumericalError("weighted least-squares system is singular after jitter");
}

struct SigmaStep {
  double sigma2;
};

// Damped fixed-point step plus a backtracking guard so the data objective at
// the fixed residuals never increases.
double guarded_sigma_step(const Eigen::VectorXd& residuals, double nu, double sigma2_old,
                          double floor, const FitConfig& config) {
  const DpdParams old_params{nu, sigma2_old};
  const Eigen::VectorXd w = dpd_weights(residuals, old_params);
  double cand = update_sigma2(residuals, w, sigma2_old, nu, floor, config.sigma_damping,
                              config.sigma_update);
  const double obj_old = dpd_data_objective(residuals, old_params);
  const double slack = 1e-12 * std::max(1.0, std::abs(obj_old));
  for (int k = 0; k < 60; ++k) {
    const double obj_cand = dpd_data_objective(residuals, DpdParams{nu, cand});
    if (obj_cand <= obj_old + slack) return cand;
    cand = 0.5 * (cand + sigma2_old);
    if (std::abs(cand - sigma2_old) <= 1e-16 * sigma2_old) break;
  }
  return sigma2_old;
}

}  // namespace

void FitConfig::validate() const {
  if (max_outer_iters < 1 || max_cd_passes < 1) {
    throw std::invalid_argument("iteration limits must be >= 1");
  }
  if (!(tol_beta > 0.0) || !(tol_sigma2 > 0.0)) {
    throw std::invalid_argument("tolerances must be > 0");
  }
  if (ridge_eps < 0.0) throw std::invalid_argument("ridge_eps must be >= 0");
  if (!(sigma_damping > 0.0 && sigma_damping <= 1.0)) {
    throw std::invalid_argument("sigma damping must be in (0,1]");
  }
}

double update_sigma2(const Eigen::VectorXd& residuals, const Eigen::VectorXd& weights,
                     double sigma2_old, double nu, double sigma2_floor, double damping,
                     SigmaUpdateRule rule) {
  if (!(sigma2_old > 0.0)) throw std::invalid_argument("sigma2_old must be > 0");
  const double n = static_cast<double>(residuals.size());
  if (nu == 0.0) {
    return std::max(residuals.squaredNorm() / n, sigma2_floor);
  }
  const double sw = weights.sum();
  if (!(sw > 0.0)) return std::max(sigma2_old, sigma2_floor);
  const double wss = (weights.array() * residuals.array().square()).sum();
  const double tail = nu * std::pow(kTwoPi * sigma2_old, -0.5 * nu) / std::pow(1.0 + nu, 1.5);
  double fp = 0.0;
  switch (rule) {
    case SigmaUpdateRule::FixedPoint:
      // From the estimating equation: sigma^2 * sum w = sum w r^2 + n*nu*sigma^2*(2pi sigma^2)^(-nu/2)(1+nu)^(-3/2)
      fp = (wss + n * sigma2_old * tail) / sw;
      break;
    case SigmaUpdateRule::PaperLiteral:
      fp = (wss / n + tail) / sw;
      break;
  }
  const double stepped = (1.0 - damping) * sigma2_old + damping * fp;
  return std::max(stepped, sigma2_floor);
}

NullFit fit_intercept_only(const Eigen::VectorXd& y, double nu, const FitConfig& config) {
  config.validate();
  if (y.size() < 1) throw std::invalid_argument("empty response");
  NullFit fit;
  const double floor = sigma2_floor_for(y, config);
  fit.mu = median_of(y);
  fit.sigma2 = initial_sigma2(y, fit.mu, floor);
  for (int it = 0; it < config.max_outer_iters; ++it) {
    const Eigen::VectorXd r = y.array() - fit.mu;
    const Eigen::VectorXd w = dpd_weights(r, DpdParams{nu, fit.sigma2});
    const double sw = w.sum();
    if (!(sw > 0.0)) throw NumericalError("all DPD weights vanished in the intercept fit");
    const double mu_new = w.dot(y) / sw;
    const Eigen::VectorXd r_new = y.array() - mu_new;
    const double s2_new = guarded_sigma_step(r_new, nu, fit.sigma2, floor, config);
    const double dmu = std::abs(mu_new - fit.mu) / std::max(1.0, std::abs(fit.mu));
    const double ds = std::abs(s2_new - fit.sigma2) / fit.sigma2;
    fit.mu = mu_new;
    fit.sigma2 = s2_new;
    if (dmu <= config.tol_beta && ds <= config.tol_sigma2) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

ModelFit fit_unpenalized(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                         const FitConfig& config) {
  config.validate();
  check_dims(design, y);
  if (nu < 0.0) throw std::invalid_argument("nu must be >= 0");

  ModelFit fit;
  fit.basis = design.basis;
  fit.column_means = design.column_means;
  fit.scaling = design.scaling;
  fit.nu = nu;

  const double floor = sigma2_floor_for(y, config);
  fit.coef.mu = median_of(y);
  fit.coef.beta = Eigen::VectorXd::Zero(design.p * design.m);
  fit.sigma2 = initial_sigma2(y, fit.coef.mu, floor);

  Eigen::VectorXd stacked = fit.coef.stacked();
  Eigen::VectorXd r = y - design.Z * stacked;
  fit.objective_trace.push_back(dpd_data_objective(r, DpdParams{nu, fit.sigma2}));

  for (int it = 1; it <= config.max_outer_iters; ++it) {
    fit.iterations = it;
    const Eigen::VectorXd w = dpd_weights(r, DpdParams{nu, fit.sigma2});
    if (!(w.sum() > 0.0)) throw NumericalError("all DPD weights vanished");

    const Eigen::MatrixXd Zw = design.Z.transpose() * w.asDiagonal();
    const Eigen::MatrixXd A = Zw * design.Z;
    const Eigen::VectorXd b = Zw * y;
    const Eigen::VectorXd stacked_new = solve_spd_with_jitter(A, b, config.ridge_eps);

    r = y - design.Z * stacked_new;
    const double s2_new = guarded_sigma_step(r, nu, fit.sigma2, floor, config);

    const double rel_coef = (stacked_new - stacked).norm() / std::max(1.0, stacked.norm());
    const double rel_sig = std::abs(s2_new - fit.sigma2) / fit.sigma2;

    stacked = stacked_new;
    fit.coef = Coefficients::from_stacked(stacked);
    fit.sigma2 = s2_new;
    fit.objective_trace.push_back(dpd_data_objective(r, DpdParams{nu, fit.sigma2}));

    if (rel_coef <= config.tol_beta && rel_sig <= config.tol_sigma2) {
      fit.converged = true;
      break;
    }
  }

  fit.active_set.clear();
  for (int j = 0; j < design.p; ++j) {
    if (fit.coef.beta.segment(j * design.m, design.m).norm() > 0.0) fit.active_set.push_back(j);
  }
  return fit;
}

ModelFit fit_penalized(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                       const PenaltySpec& penalty, const FitConfig& config,
                       const ModelFit* warm_start) {
  config.validate();
  penalty.validate();
  check_dims(design, y);
  if (nu < 0.0) throw std::invalid_argument("nu must be >= 0");

  const int n = design.n;
  const int p = design.p;
  const int m = design.m;

  ModelFit fit;
  fit.basis = design.basis;
  fit.column_means = design.column_means;
  fit.scaling = design.scaling;
  fit.nu = nu;
  fit.penalty = penalty;

  const double floor = sigma2_floor_for(y, config);
  if (warm_start != nullptr && warm_start->coef.beta.size() == p * m) {
    fit.coef = warm_start->coef;
    fit.sigma2 = std::max(warm_start->sigma2, floor);
  } else {
    const NullFit null = fit_intercept_only(y, nu, config);
    fit.coef.mu = null.mu;
    fit.coef.beta = Eigen::VectorXd::Zero(p * m);
    fit.sigma2 = std::max(null.sigma2, floor);
  }

  // Cholesky factors of the centered Grams; the penalty norm is ||U beta_j||.
  std::vector<Eigen::LLT<Eigen::MatrixXd>> gram_llt;
  gram_llt.reserve(p);
  for (int j = 0; j < p; ++j) {
    gram_llt.emplace_back(design.gram[j]);
    if (gram_llt.back().info() != Eigen::Success) {
      throw NumericalError("group Gram matrix is not positive definite");
    }
  }
  const auto group_pen_norm = [&](int j) {
    return (Eigen::MatrixXd(gram_llt[j].matrixU()) * fit.coef.beta.segment(j * m, m)).norm();
  };
  const auto penalty_total = [&]() {
    double acc = 0.0;
    for (int j = 0; j < p; ++j) acc += penalty_value(group_pen_norm(j), penalty);
    return acc;
  };

  Eigen::VectorXd r = y - design.Z * fit.coef.stacked();
  fit.objective_trace.push_back(dpd_data_objective(r, DpdParams{nu, fit.sigma2}) + penalty_total());

  std::vector<int> order(p);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 order_rng(config.group_order_seed);

  for (int outer = 1; outer <= config.max_outer_iters; ++outer) {
    fit.iterations = outer;
    const DpdParams params{nu, fit.sigma2};
    const Eigen::VectorXd w = dpd_weights(r, params);
    const double sw = w.sum();
    if (!(sw > 0.0)) throw NumericalError("all DPD weights vanished");
    const double scale = (1.0 + nu) / (static_cast<double>(n) * fit.sigma2);

    if (config.randomize_group_order) std::shuffle(order.begin(), order.end(), order_rng);

    const double beta_scale = std::max(1.0, fit.coef.stacked().norm());
    double max_change = 0.0;

    for (int pass = 0; pass < config.max_cd_passes; ++pass) {
      for (int j : order) {
        const auto Zj = design.group_cols(j);
        auto betaj = fit.coef.beta.segment(j * m, m);

        const Eigen::MatrixXd Hj = scale * (Zj.transpose() * w.asDiagonal() * Zj);
        // Transform to theta = U beta_j so the penalty argument is ||theta||.
        const Eigen::MatrixXd tmp = gram_llt[j].matrixL().solve(Hj);
        const Eigen::MatrixXd Ht = gram_llt[j].matrixL().solve(tmp.transpose()).transpose();

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ht, Eigen::EigenvaluesOnly);
        double eta = es.eigenvalues().maxCoeff();
        eta = std::max(eta * (1.0 + 1e-10), 1e-12);

        const Eigen::VectorXd theta = Eigen::MatrixXd(gram_llt[j].matrixU()) * betaj;
        const Eigen::VectorXd grad_beta = -scale * (Zj.transpose() * (w.array() * r.array()).matrix());
        const Eigen::VectorXd grad_theta = gram_llt[j].matrixL().solve(grad_beta);

        const Eigen::VectorXd v = theta - grad_theta / eta;
        const Eigen::VectorXd theta_new = group_prox(v, penalty, 1.0 / eta);
        const Eigen::VectorXd dtheta = theta_new - theta;
        if (dtheta.isZero(0.0)) continue;
        const Eigen::VectorXd dbeta = gram_llt[j].matrixU().solve(dtheta);
        betaj += dbeta;
        r.noalias() -= Zj * dbeta;
        max_change = std::max(max_change, dbeta.norm());
      }
    }

    if (config.refresh_intercept) {
      const double delta = w.dot(r) / sw;
      fit.coef.mu += delta;
      r.array() -= delta;
      max_change = std::max(max_change, std::abs(delta));
    }

    const double s2_new = guarded_sigma_step(r, nu, fit.sigma2, floor, config);
    const double rel_sig = std::abs(s2_new - fit.sigma2) / fit.sigma2;
    fit.sigma2 = s2_new;

    const double obj = dpd_data_objective(r, DpdParams{nu, fit.sigma2}) + penalty_total();
    assert(obj <= fit.objective_trace.back() + 1e-8);
    fit.objective_trace.push_back(obj);

    if (max_change / beta_scale <= config.tol_beta && rel_sig <= config.tol_sigma2) {
      fit.converged = true;
      break;
    }
  }

  fit.active_set.clear();
  for (int j = 0; j < p; ++j) {
    if (fit.coef.beta.segment(j * m, m).norm() > 0.0) fit.active_set.push_back(j);
  }
  return fit;
}

GroupTransform standardize_group(const Eigen::MatrixXd& Zj, const Eigen::VectorXd& weights,
                                 double ridge_eps) {
  if (Zj.rows() != weights.size()) throw std::invalid_argument("standardize_group: size mismatch");
  Eigen::MatrixXd M = Zj.transpose() * weights.asDiagonal() * Zj;
  const double scale = std::max(M.diagonal().maxCoeff(), 1e-300);
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd Mj = M;
    if (jitter > 0.0) Mj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(Mj);
    if (llt.info() == Eigen::Success) {
      GroupTransform t;
      t.forward = llt.matrixU();
      t.inverse = llt.matrixU().solve(Eigen::MatrixXd::Identity(M.rows(), M.cols()));
      if (t.forward.allFinite() && t.inverse.allFinite()) return t;
    }
    jitter = jitter == 0.0 ? std::max(ridge_eps * scale, 1e-14 * scale) : jitter * 100.0;
    if (jitter > 1e-2 * scale) break;
  }
  throw NumericalError("weighted group Gram is rank deficient after jitter");
}

Prediction predict(const ModelFit& fit, const Eigen::MatrixXd& X_raw) {
  const int m = fit.basis.dim();
  if (m < 1 || fit.coef.beta.size() % m != 0) {
    throw std::invalid_argument("predict: inconsistent fitted model");
  }
  const int p = static_cast<int>(fit.coef.beta.size()) / m;
  if (X_raw.cols() != p) throw std::invalid_argument("predict: covariate column count mismatch");

  Prediction out;
  const Eigen::MatrixXd rows =
      make_design_rows(X_raw, fit.basis, fit.column_means, fit.scaling, &out.clamped);
  out.yhat = rows * fit.coef.stacked();
  out.components.resize(X_raw.rows(), p);
  for (int j = 0; j < p; ++j) {
    out.components.col(j) = rows.middleCols(1 + j * m, m) * fit.coef.beta.segment(j * m, m);
  }
  return out;
}

double sigma2_floor(const Eigen::VectorXd& y, const FitConfig& config) {
  return sigma2_floor_for(y, config);
}

double lambda_max(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                  const FitConfig& config) {
  check_dims(design, y);
  const NullFit null = fit_intercept_only(y, nu, config);
  const Eigen::VectorXd r = y.array() - null.mu;
  const DpdParams params{nu, null.sigma2};
  const Eigen::VectorXd w = dpd_weights(r, params);
  const double scale = (1.0 + nu) / (static_cast<double>(design.n) * null.sigma2);
  double best = 0.0;
  for (int j = 0; j < design.p; ++j) {
    Eigen::LLT<Eigen::MatrixXd> llt(design.gram[j]);
    const Eigen::VectorXd grad =
        -scale * (design.group_cols(j).transpose() * (w.array() * r.array()).matrix());
    best = std::max(best, llt.matrixL().solve(grad).norm());
  }
  return best;
}

}  // namespace robadd
