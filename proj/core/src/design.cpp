#include "robadd/design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robadd {

ColumnScaling ColumnScaling::identity(int p) {
  ColumnScaling s;
  s.lo = Eigen::VectorXd::Zero(p);
  s.hi = Eigen::VectorXd::Ones(p);
  return s;
}

RescaleResult rescale_to_unit(const Eigen::MatrixXd& raw) {
  if (raw.rows() < 1) throw std::invalid_argument("rescale_to_unit: empty matrix");
  if (!raw.allFinite()) throw std::invalid_argument("rescale_to_unit: non-finite entries");
  RescaleResult out;
  const int p = static_cast<int>(raw.cols());
  out.scaling.lo.resize(p);
  out.scaling.hi.resize(p);
  out.unit.resizeLike(raw);
  for (int j = 0; j < p; ++j) {
    const double lo = raw.col(j).minCoeff();
    const double hi = raw.col(j).maxCoeff();
    if (!(hi > lo)) throw std::invalid_argument("rescale_to_unit: constant column " + std::to_string(j));
    out.scaling.lo[j] = lo;
    out.scaling.hi[j] = hi;
    out.unit.col(j) = (raw.col(j).array() - lo) / (hi - lo);
  }
  return out;
}

Eigen::MatrixXd apply_scaling(const Eigen::MatrixXd& raw, const ColumnScaling& scaling,
                              std::int64_t* clamped) {
  if (raw.cols() != scaling.cols()) {
    throw std::invalid_argument("apply_scaling: column count mismatch");
  }
  Eigen::MatrixXd unit(raw.rows(), raw.cols());
  std::int64_t n_clamped = 0;
  for (int j = 0; j < raw.cols(); ++j) {
    const double lo = scaling.lo[j];
    const double span = scaling.hi[j] - lo;
    for (int i = 0; i < raw.rows(); ++i) {
      double u = (raw(i, j) - lo) / span;
      if (u < 0.0 || u > 1.0) {
        ++n_clamped;
        u = std::clamp(u, 0.0, 1.0);
      }
      unit(i, j) = u;
    }
  }
  if (clamped) *clamped = n_clamped;
  return unit;
}

CenteredDesign build_design(const Eigen::MatrixXd& X_unit, const SplineBasis& basis,
                            const ColumnScaling& scaling) {
  const int n = static_cast<int>(X_unit.rows());
  const int p = static_cast<int>(X_unit.cols());
  const int m = basis.dim();
  if (!X_unit.allFinite()) throw std::invalid_argument("build_design: non-finite entries");
  if (X_unit.size() > 0 && (X_unit.minCoeff() < 0.0 || X_unit.maxCoeff() > 1.0)) {
    throw std::invalid_argument("build_design: covariates must lie in [0,1]; rescale first");
  }
  if (n < m + 1) throw std::invalid_argument("build_design: need at least m+1 samples");
  if (p < 1) throw std::invalid_argument("build_design: need at least one covariate");
  if (scaling.cols() != p) throw std::invalid_argument("build_design: scaling/covariate mismatch");

  CenteredDesign d{Eigen::MatrixXd(), Eigen::VectorXd(), basis, scaling, {}, n, p, m};
  d.Z.resize(n, p * m + 1);
  d.Z.col(0).setOnes();
  d.column_means.resize(p * m);

  for (int j = 0; j < p; ++j) {
    const int off = d.group_offset(j);
    for (int i = 0; i < n; ++i) {
      d.Z.row(i).segment(off, m) = basis.eval_raw(X_unit(i, j)).head(m).transpose();
    }
    for (int k = 0; k < m; ++k) {
      const double mean = d.Z.col(off + k).mean();
      d.column_means[j * m + k] = mean;
      d.Z.col(off + k).array() -= mean;
    }
  }

  d.gram.reserve(p);
  for (int j = 0; j < p; ++j) {
    d.gram.push_back(centered_gram(basis, d.column_means.segment(j * m, m)));
  }
  return d;
}

CenteredDesign build_design(const Eigen::MatrixXd& X_unit, const SplineBasis& basis) {
  return build_design(X_unit, basis, ColumnScaling::identity(static_cast<int>(X_unit.cols())));
}

Eigen::MatrixXd make_design_rows(const Eigen::MatrixXd& X_raw, const SplineBasis& basis,
                                 const Eigen::VectorXd& column_means, const ColumnScaling& scaling,
                                 std::int64_t* clamped) {
  const int p = static_cast<int>(X_raw.cols());
  const int m = basis.dim();
  if (column_means.size() != p * m) {
    throw std::invalid_argument("make_design_rows: column_means length mismatch");
  }
  const Eigen::MatrixXd unit = apply_scaling(X_raw, scaling, clamped);
  Eigen::MatrixXd rows(X_raw.rows(), p * m + 1);
  rows.col(0).setOnes();
  for (int i = 0; i < unit.rows(); ++i) {
    for (int j = 0; j < p; ++j) {
      const Eigen::VectorXd b = basis.eval_raw(unit(i, j)).head(m) - column_means.segment(j * m, m);
      rows.row(i).segment(1 + j * m, m) = b.transpose();
    }
  }
  return rows;
}

}  // namespace robadd
