#pragma once

#include <Eigen/Core>
#include <vector>

namespace robadd {

/// Open knot sequence on [0,1]: boundary knots repeated `order` times,
/// strictly increasing interior knots.
struct KnotVector {
  int order = 4;                  // spline order r (degree r-1)
  std::vector<double> interior;   // sorted, strictly inside (0,1)

  /// Interior knots at i/(K+1), i = 1..K.
  static KnotVector equally_spaced(int num_interior, int order);

  int num_interior() const { return static_cast<int>(interior.size()); }
  /// Number of raw B-spline functions, K + r.
  int num_raw() const { return num_interior() + order; }
  /// Full padded sequence of length K + 2r.
  std::vector<double> padded() const;

  void validate() const;
};

/// B-spline basis on [0,1]. Of the K + r raw functions the first
/// m = K + r - 1 are retained for the regression design; the last one is
/// redundant once columns are centered.
class SplineBasis {
 public:
  explicit SplineBasis(KnotVector knots);
  /// Convenience: basis with dim() == m for the given order.
  static SplineBasis with_dim(int m, int order);

  int order() const { return knots_.order; }
  int num_raw() const { return knots_.num_raw(); }
  /// Retained dimension m = K + r - 1.
  int dim() const { return knots_.num_raw() - 1; }
  const KnotVector& knots() const { return knots_; }
  const std::vector<double>& padded_knots() const { return padded_; }

  /// All raw basis values at x via the Cox-de Boor recursion.
  /// Nonnegative, sum to one, at most r entries nonzero. x must be in [0,1].
  Eigen::VectorXd eval_raw(double x) const;

 private:
  KnotVector knots_;
  std::vector<double> padded_;
};

/// Gauss-Legendre nodes/weights on [-1,1].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
QuadratureRule gauss_legendre(int num_nodes);

/// Exact Gram matrix of the raw basis, (K+r) x (K+r), entries
/// int_0^1 b_k b_l dt.  Integrated per knot interval with enough
/// Gauss-Legendre nodes to be exact for the degree-(2r-2) products.
Eigen::MatrixXd raw_gram(const SplineBasis& basis);

/// int_0^1 b_k dt for each raw function.
Eigen::VectorXd raw_integrals(const SplineBasis& basis);

/// Gram of the centered retained functions B_k = b_k - means[k], m x m.
/// Uses the raw Gram plus the rank-one centering correction.
Eigen::MatrixXd centered_gram(const SplineBasis& basis, const Eigen::VectorXd& means);

}  // namespace robadd
