#include "robadd/spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robadd {

KnotVector KnotVector::equally_spaced(int num_interior, int order) {
  if (order < 1) throw std::invalid_argument("spline order must be >= 1");
  if (num_interior < 0) throw std::invalid_argument("num_interior must be >= 0");
  KnotVector kv;
  kv.order = order;
  kv.interior.resize(num_interior);
  for (int i = 1; i <= num_interior; ++i) {
    kv.interior[i - 1] = static_cast<double>(i) / (num_interior + 1);
  }
  return kv;
}

void KnotVector::validate() const {
  if (order < 1) throw std::invalid_argument("spline order must be >= 1");
  double prev = 0.0;
  for (double t : interior) {
    if (!(t > prev) || !(t < 1.0)) {
      throw std::invalid_argument("interior knots must be strictly increasing inside (0,1)");
    }
    prev = t;
  }
}

std::vector<double> KnotVector::padded() const {
  std::vector<double> t;
  t.reserve(interior.size() + 2 * order);
  t.insert(t.end(), order, 0.0);
  t.insert(t.end(), interior.begin(), interior.end());
  t.insert(t.end(), order, 1.0);
  return t;
}

SplineBasis::SplineBasis(KnotVector knots) : knots_(std::move(knots)) {
  knots_.validate();
  padded_ = knots_.padded();
}

SplineBasis SplineBasis::with_dim(int m, int order) {
  // m = K + r - 1  =>  K = m + 1 - r
  int num_interior = m + 1 - order;
  if (num_interior < 0) {
    throw std::invalid_argument("basis dim too small for the requested order");
  }
  return SplineBasis(KnotVector::equally_spaced(num_interior, order));
}

Eigen::VectorXd SplineBasis::eval_raw(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("spline evaluation point outside [0,1]");
  }
  const int r = knots_.order;
  const int nbasis = knots_.num_raw();
  const std::vector<double>& t = padded_;

  // Knot span index: largest i with t[i] <= x < t[i+1], clamped so that
  // x = 1 falls in the last non-degenerate interval.
  int span = r - 1;
  {
    int hi = nbasis - 1;  // last valid span
    // binary search over t[r-1 .. nbasis]
    int lo = r - 1;
    while (lo < hi) {
      int mid = (lo + hi + 1) / 2;
      if (t[static_cast<size_t>(mid)] <= x) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    span = std::min(lo, nbasis - 1);
  }

  // Triangular recursion for the r nonzero functions on this span
  // (de Boor; left/right difference form).
  std::vector<double> vals(static_cast<size_t>(r), 0.0);
  std::vector<double> left(static_cast<size_t>(r), 0.0);
  std::vector<double> right(static_cast<size_t>(r), 0.0);
  vals[0] = 1.0;
  for (int j = 1; j < r; ++j) {
    left[static_cast<size_t>(j)] = x - t[static_cast<size_t>(span + 1 - j)];
    right[static_cast<size_t>(j)] = t[static_cast<size_t>(span + j)] - x;
    double saved = 0.0;
    for (int k = 0; k < j; ++k) {
      double denom = right[static_cast<size_t>(k + 1)] + left[static_cast<size_t>(j - k)];
      double term = denom > 0.0 ? vals[static_cast<size_t>(k)] / denom : 0.0;
      vals[static_cast<size_t>(k)] = saved + right[static_cast<size_t>(k + 1)] * term;
      saved = left[static_cast<size_t>(j - k)] * term;
    }
    vals[static_cast<size_t>(j)] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(nbasis);
  for (int k = 0; k < r; ++k) {
    int idx = span - r + 1 + k;
    if (idx >= 0 && idx < nbasis) out[idx] = vals[static_cast<size_t>(k)];
  }
  return out;
}

QuadratureRule gauss_legendre(int num_nodes) {
  if (num_nodes < 1) throw std::invalid_argument("quadrature needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(num_nodes);
  rule.weights.resize(num_nodes);
  const int n = num_nodes;
  // Newton iteration on Legendre polynomials, symmetric roots.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

namespace {

// Distinct breakpoints of the knot sequence: 0, interior..., 1.
std::vector<double> breakpoints(const SplineBasis& basis) {
  std::vector<double> b;
  b.push_back(0.0);
  for (double t : basis.knots().interior) b.push_back(t);
  b.push_back(1.0);
  return b;
}

}  // namespace

Eigen::MatrixXd raw_gram(const SplineBasis& basis) {
  const int nb = basis.num_raw();
  // Products of two degree-(r-1) pieces have degree 2r-2; r nodes are exact.
  const QuadratureRule rule = gauss_legendre(std::max(basis.order(), 1));
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(nb, nb);
  const std::vector<double> bp = breakpoints(basis);
  for (size_t seg = 0; seg + 1 < bp.size(); ++seg) {
    const double a = bp[seg], b = bp[seg + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int q = 0; q < rule.nodes.size(); ++q) {
      const double x = mid + half * rule.nodes[q];
      const Eigen::VectorXd v = basis.eval_raw(x);
      G.noalias() += (half * rule.weights[q]) * v * v.transpose();
    }
  }
  // Quadrature accumulates symmetrically up to rounding; make it exact.
  G = 0.5 * (G + G.transpose()).eval();
  return G;
}

Eigen::VectorXd raw_integrals(const SplineBasis& basis) {
  const int nb = basis.num_raw();
  const QuadratureRule rule = gauss_legendre(std::max(basis.order(), 1));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nb);
  const std::vector<double> bp = breakpoints(basis);
  for (size_t seg = 0; seg + 1 < bp.size(); ++seg) {
    const double a = bp[seg], b = bp[seg + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int q = 0; q < rule.nodes.size(); ++q) {
      u += (half * rule.weights[q]) * basis.eval_raw(mid + half * rule.nodes[q]);
    }
  }
  return u;
}

Eigen::MatrixXd centered_gram(const SplineBasis& basis, const Eigen::VectorXd& means) {
  const int m = basis.dim();
  if (means.size() != m) {
    throw std::invalid_argument("centered_gram: means length must equal basis dim");
  }
  const Eigen::MatrixXd G = raw_gram(basis).topLeftCorner(m, m);
  const Eigen::VectorXd u = raw_integrals(basis).head(m);
  // int (b_k - c_k)(b_l - c_l) dt = G_kl - c_k u_l - c_l u_k + c_k c_l
  Eigen::MatrixXd D = G - means * u.transpose() - u * means.transpose() + means * means.transpose();
  D = 0.5 * (D + D.transpose()).eval();
  return D;
}

}  // namespace robadd
