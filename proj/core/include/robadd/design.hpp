#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "robadd/spline.hpp"

namespace robadd {

/// Per-covariate affine ranges used to map raw inputs onto [0,1].
struct ColumnScaling {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static ColumnScaling identity(int p);
  int cols() const { return static_cast<int>(lo.size()); }
};

struct RescaleResult {
  Eigen::MatrixXd unit;  // entries in [0,1]
  ColumnScaling scaling;
};

/// Min-max rescale of every column. Throws on constant columns.
RescaleResult rescale_to_unit(const Eigen::MatrixXd& raw);

/// Apply stored ranges to new data; out-of-range values are clamped to [0,1]
/// and counted in *clamped when given.
Eigen::MatrixXd apply_scaling(const Eigen::MatrixXd& raw, const ColumnScaling& scaling,
                              std::int64_t* clamped = nullptr);

/// Centered spline regression design: intercept column of ones followed by
/// p groups of m centered basis columns. Immutable after construction.
struct CenteredDesign {
  Eigen::MatrixXd Z;             // n x (p*m + 1)
  Eigen::VectorXd column_means;  // length p*m, subtracted sample means
  SplineBasis basis;
  ColumnScaling scaling;         // identity when inputs were already in [0,1]
  std::vector<Eigen::MatrixXd> gram;  // p centered Gram matrices, each m x m
  int n = 0;
  int p = 0;
  int m = 0;

  int num_coef() const { return p * m + 1; }
  int group_offset(int j) const { return 1 + j * m; }
  Eigen::Block<const Eigen::MatrixXd> group_cols(int j) const {
    return Z.block(0, group_offset(j), n, m);
  }
};

/// Build the centered design from unit-interval covariates. Only the first
/// m of the K+r raw functions are kept; each column is centered by its
/// sample mean and the means are stored for prediction.
CenteredDesign build_design(const Eigen::MatrixXd& X_unit, const SplineBasis& basis,
                            const ColumnScaling& scaling);
CenteredDesign build_design(const Eigen::MatrixXd& X_unit, const SplineBasis& basis);

/// Design rows for new raw observations using stored scaling and means.
Eigen::MatrixXd make_design_rows(const Eigen::MatrixXd& X_raw, const SplineBasis& basis,
                                 const Eigen::VectorXd& column_means, const ColumnScaling& scaling,
                                 std::int64_t* clamped = nullptr);

}  // namespace robadd
