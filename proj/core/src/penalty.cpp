#include "robadd/penalty.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace robadd {

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Scad: return "scad";
    case PenaltyKind::Mcp: return "mcp";
    case PenaltyKind::GroupLasso: return "glasso";
  }
  return "scad";
}

PenaltyKind penalty_kind_from_string(const std::string& s) {
  if (s == "scad") return PenaltyKind::Scad;
  if (s == "mcp") return PenaltyKind::Mcp;
  if (s == "glasso" || s == "grouplasso") return PenaltyKind::GroupLasso;
  throw std::invalid_argument("unknown penalty kind: " + s);
}

PenaltySpec PenaltySpec::scad(double lambda, double shape) {
  PenaltySpec s{PenaltyKind::Scad, lambda, shape};
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::mcp(double lambda, double shape) {
  PenaltySpec s{PenaltyKind::Mcp, lambda, shape};
  s.validate();
  return s;
}

PenaltySpec PenaltySpec::group_lasso(double lambda) {
  PenaltySpec s{PenaltyKind::GroupLasso, lambda, 0.0};
  s.validate();
  return s;
}

void PenaltySpec::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("penalty lambda must be >= 0");
  if (kind == PenaltyKind::Scad && !(shape > 2.0)) {
    throw std::invalid_argument("SCAD shape must be > 2");
  }
  if (kind == PenaltyKind::Mcp && !(shape > 1.0)) {
    throw std::invalid_argument("MCP shape must be > 1");
  }
}

double penalty_value(double t, const PenaltySpec& spec) {
  if (t < 0.0) throw std::invalid_argument("penalty argument must be >= 0");
  const double lam = spec.lambda;
  const double a = spec.shape;
  switch (spec.kind) {
    case PenaltyKind::GroupLasso:
      return lam * t;
    case PenaltyKind::Mcp:
      if (t <= a * lam) return lam * t - t * t / (2.0 * a);
      return 0.5 * a * lam * lam;
    case PenaltyKind::Scad:
      if (t <= lam) return lam * t;
      if (t <= a * lam) {
        // integral of (a*lam - s)/(a-1) from lam to t, plus lam^2
        return lam * lam + (a * lam * (t - lam) - 0.5 * (t * t - lam * lam)) / (a - 1.0);
      }
      return 0.5 * (a + 1.0) * lam * lam;
  }
  return 0.0;
}

double penalty_derivative(double t, const PenaltySpec& spec) {
  if (t < 0.0) throw std::invalid_argument("penalty argument must be >= 0");
  const double lam = spec.lambda;
  const double a = spec.shape;
  switch (spec.kind) {
    case PenaltyKind::GroupLasso:
      return lam;
    case PenaltyKind::Mcp:
      return std::max(a * lam - t, 0.0) / a;
    case PenaltyKind::Scad:
      if (t <= lam) return lam;
      return std::max(a * lam - t, 0.0) / (a - 1.0);
  }
  return 0.0;
}

double penalty_second_derivative(double t, const PenaltySpec& spec) {
  if (t < 0.0) throw std::invalid_argument("penalty argument must be >= 0");
  const double lam = spec.lambda;
  const double a = spec.shape;
  switch (spec.kind) {
    case PenaltyKind::GroupLasso:
      return 0.0;
    case PenaltyKind::Mcp:
      return t < a * lam ? -1.0 / a : 0.0;
    case PenaltyKind::Scad:
      if (t <= lam) return 0.0;
      return t < a * lam ? -1.0 / (a - 1.0) : 0.0;
  }
  return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double t) {
  if (t < 0.0) throw std::invalid_argument("soft threshold level must be >= 0");
  const double norm = x.norm();
  if (norm <= t || norm == 0.0) return Eigen::VectorXd::Zero(x.size());
  return (1.0 - t / norm) * x;
}

Eigen::VectorXd scad_threshold(const Eigen::VectorXd& x, double lambda, double gamma) {
  if (!(gamma > 2.0)) throw std::invalid_argument("SCAD threshold needs gamma > 2");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const double norm = x.norm();
  if (norm <= 2.0 * lambda) return soft_threshold(x, lambda);
  if (norm <= gamma * lambda) {
    return soft_threshold(x, gamma * lambda / (gamma - 1.0)) * ((gamma - 1.0) / (gamma - 2.0));
  }
  return x;
}

Eigen::VectorXd mcp_threshold(const Eigen::VectorXd& x, double lambda, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("MCP threshold needs gamma > 1");
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  const double norm = x.norm();
  if (norm > gamma * lambda) return x;
  return soft_threshold(x, lambda) * (gamma / (gamma - 1.0));
}

namespace {

// Scalar objective g(t) = 1/2 (t - s)^2 + w P(t) on t >= 0.
double scalar_objective(double t, double s, double w, const PenaltySpec& spec) {
  const double d = t - s;
  return 0.5 * d * d + w * penalty_value(t, spec);
}

// g is quadratic on each penalty piece; collect the per-piece stationary
// points clamped to their region plus the breakpoints, evaluate, and keep
// the minimizer.
double scalar_prox(double s, double w, const PenaltySpec& spec) {
  const double lam = spec.lambda;
  const double a = spec.shape;
  double candidates[6];
  int nc = 0;
  candidates[nc++] = 0.0;
  switch (spec.kind) {
    case PenaltyKind::GroupLasso: {
      candidates[nc++] = std::max(s - w * lam, 0.0);
      break;
    }
    case PenaltyKind::Mcp: {
      // region [0, a*lam]: g' = t(1 - w/a) - (s - w*lam)
      const double c = 1.0 - w / a;
      if (c > 0.0) candidates[nc++] = std::clamp((s - w * lam) / c, 0.0, a * lam);
      candidates[nc++] = a * lam;
      if (s > a * lam) candidates[nc++] = s;
      break;
    }
    case PenaltyKind::Scad: {
      candidates[nc++] = std::clamp(s - w * lam, 0.0, lam);  // [0, lam]
      // (lam, a*lam]: g' = t(1 - w/(a-1)) - s + w*a*lam/(a-1)
      const double c = 1.0 - w / (a - 1.0);
      if (c != 0.0) {
        candidates[nc++] = std::clamp((s - w * a * lam / (a - 1.0)) / c, lam, a * lam);
      }
      candidates[nc++] = lam;
      candidates[nc++] = a * lam;
      if (s > a * lam) candidates[nc++] = s;
      break;
    }
  }
  double best_t = 0.0;
  double best_g = scalar_objective(0.0, s, w, spec);
  for (int i = 1; i < nc; ++i) {
    const double g = scalar_objective(candidates[i], s, w, spec);
    if (g < best_g) {
      best_g = g;
      best_t = candidates[i];
    }
  }
  return best_t;
}

}  // namespace

Eigen::VectorXd group_prox(const Eigen::VectorXd& v, const PenaltySpec& spec, double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("prox weight must be > 0");
  spec.validate();
  const double s = v.norm();
  if (s == 0.0) return Eigen::VectorXd::Zero(v.size());
  const double t = scalar_prox(s, weight, spec);
  if (t == 0.0) return Eigen::VectorXd::Zero(v.size());
  return (t / s) * v;
}

double gram_norm(const Eigen::VectorXd& beta, const Eigen::MatrixXd& D) {
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gram_norm: matrix is not positive definite");
  }
  return (llt.matrixU() * beta).norm();
}

}  // namespace robadd
