#include "robadd/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "robadd/parallel.hpp"

namespace robadd {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::string to_string(InfoCriterion ic) {
  switch (ic) {
    case InfoCriterion::Aic: return "aic";
    case InfoCriterion::Bic: return "bic";
    case InfoCriterion::Ebic: return "ebic";
    case InfoCriterion::Cp: return "cp";
  }
  return "ebic";
}

InfoCriterion ic_from_string(const std::string& s) {
  if (s == "aic") return InfoCriterion::Aic;
  if (s == "bic") return InfoCriterion::Bic;
  if (s == "ebic") return InfoCriterion::Ebic;
  if (s == "cp") return InfoCriterion::Cp;
  throw std::invalid_argument("unknown information criterion: " + s);
}

void SelectionGrid::validate() const {
  if (nus.empty()) throw std::invalid_argument("nu grid is empty");
  for (double v : nus) {
    if (!(v >= 0.0)) throw std::invalid_argument("nu grid values must be >= 0");
  }
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw std::invalid_argument("lambda grid values must be >= 0");
  }
  if (lambdas.empty() && lambda_grid_size < 1) {
    throw std::invalid_argument("lambda grid size must be >= 1");
  }
  if (lambdas.empty() && !(lambda_min_ratio > 0.0 && lambda_min_ratio <= 1.0)) {
    throw std::invalid_argument("lambda_min_ratio must lie in (0,1]");
  }
}

double information_criterion(double sigma2_hat, int df, InfoCriterion kind, int n, int p,
                             double sigma_u) {
  if (!(sigma2_hat > 0.0)) throw std::invalid_argument("sigma2_hat must be > 0");
  if (n < 1 || p < 1 || df < 0) throw std::invalid_argument("bad IC arguments");
  const double nn = static_cast<double>(n);
  const double fit_term = nn * std::log(nn * sigma2_hat);
  switch (kind) {
    case InfoCriterion::Aic: return fit_term + 2.0 * df;
    case InfoCriterion::Bic: return fit_term + df * std::log(nn);
    case InfoCriterion::Ebic: return fit_term + (std::log(nn) + std::log(static_cast<double>(p))) * df;
    case InfoCriterion::Cp: {
      if (!(sigma_u > 0.0)) throw std::invalid_argument("Cp requires a positive sigma_u");
      return nn * sigma2_hat / (sigma_u * sigma_u) - nn + 2.0 * df;
    }
  }
  return fit_term;
}

double hscore(const ModelFit& fit, const CenteredDesign& design, const Eigen::VectorXd& y,
              HScoreForm form) {
  if (y.size() != design.n) throw std::invalid_argument("hscore: dimension mismatch");
  const double nu = fit.nu;
  const double s2 = fit.sigma2;
  const double n = static_cast<double>(design.n);
  Eigen::VectorXd r = y - design.Z * fit.coef.stacked();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double rr = r[i] * r[i];
    switch (form) {
      case HScoreForm::Derivative: {
        // (1/n) sum{ -2 d2V/dy2 + (dV/dy)^2 } with the unnormalized Gaussian
        // kernel inside the loss; homogeneous of degree -2 under rescaling.
        const double e = std::exp(-0.5 * nu * rr / s2);
        acc += (2.0 * nu * rr - 2.0 * s2 + (1.0 + nu) * rr * e) * e;
        break;
      }
      case HScoreForm::PaperPrinted: {
        // Simplified closed form as printed, with the normalized density.
        const double s = nu * normal_log_density(r[i], s2);
        const double w = s < -690.0 ? 0.0 : std::exp(s);
        acc += (nu * rr - s2 + (1.0 + nu) * rr * w) * w;
        break;
      }
    }
  }
  return (1.0 + nu) / (n * s2 * s2) * acc;
}

double GridCell::ic_value(InfoCriterion kind) const {
  switch (kind) {
    case InfoCriterion::Aic: return aic;
    case InfoCriterion::Bic: return bic;
    case InfoCriterion::Ebic: return ebic;
    case InfoCriterion::Cp: return cp;
  }
  return ebic;
}

int LambdaPath::chosen(InfoCriterion kind) const {
  int best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < cells.size(); ++i) {
    const GridCell& cell = cells[i];
    if (cell.failed || !cell.converged) continue;
    const double v = cell.ic_value(kind);
    if (std::isfinite(v) && v < best_value) {  // strict: ties keep larger lambda
      best_value = v;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double SelectionReport::chosen_nu() const {
  if (chosen_nu_index < 0) throw std::logic_error("no nu was selected");
  return paths[static_cast<size_t>(chosen_nu_index)].nu;
}

double SelectionReport::chosen_lambda() const { return chosen_cell().lambda; }

const GridCell& SelectionReport::chosen_cell() const {
  if (chosen_nu_index < 0) throw std::logic_error("no cell was selected");
  const int li = chosen_lambda_per_nu[static_cast<size_t>(chosen_nu_index)];
  return paths[static_cast<size_t>(chosen_nu_index)].cells[static_cast<size_t>(li)];
}

double default_penalty_shape(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::Scad: return 3.7;
    case PenaltyKind::Mcp: return 3.0;
    case PenaltyKind::GroupLasso: return 0.0;
  }
  return 3.7;
}

std::vector<double> make_lambda_grid(double lambda_max_value, int size, double min_ratio) {
  if (size < 1) throw std::invalid_argument("lambda grid size must be >= 1");
  if (!(lambda_max_value > 0.0)) return {0.0};
  if (size == 1) return {lambda_max_value};
  std::vector<double> grid(static_cast<size_t>(size));
  const double lmin = lambda_max_value * min_ratio;
  const double step = std::log(lmin / lambda_max_value) / (size - 1);
  for (int i = 0; i < size; ++i) grid[static_cast<size_t>(i)] = lambda_max_value * std::exp(step * i);
  return grid;
}

double robust_sigma_u(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                      const FitConfig& config) {
  const ModelFit full = fit_unpenalized(design, y, nu, config);
  return std::sqrt(full.sigma2);
}

LambdaPath select_lambda(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                         PenaltyKind kind, const SelectionGrid& grid, const FitConfig& config,
                         double shape) {
  grid.validate();
  if (shape < 0.0) shape = default_penalty_shape(kind);

  LambdaPath path;
  path.nu = nu;
  path.sigma_u = robust_sigma_u(design, y, nu, config);

  std::vector<double> lambdas = grid.lambdas;
  if (lambdas.empty()) {
    lambdas = make_lambda_grid(lambda_max(design, y, nu, config), grid.lambda_grid_size,
                               grid.lambda_min_ratio);
  }

  const double floor = sigma2_floor(y, config);
  path.cells.reserve(lambdas.size());
  const ModelFit* warm = nullptr;
  int n_failed = 0;
  for (double lam : lambdas) {
    GridCell cell;
    cell.nu = nu;
    cell.lambda = lam;
    try {
      PenaltySpec spec{kind, lam, shape};
      spec.validate();
      cell.fit = fit_penalized(design, y, nu, spec, config, warm);
      cell.converged = cell.fit.converged;
      cell.active_set = cell.fit.active_set;
      cell.df = 1 + design.m * static_cast<int>(cell.active_set.size());
      cell.sigma2 = cell.fit.sigma2;
      cell.objective = cell.fit.objective();
      cell.aic = information_criterion(cell.sigma2, cell.df, InfoCriterion::Aic, design.n, design.p);
      cell.bic = information_criterion(cell.sigma2, cell.df, InfoCriterion::Bic, design.n, design.p);
      cell.ebic = information_criterion(cell.sigma2, cell.df, InfoCriterion::Ebic, design.n, design.p);
      cell.cp = information_criterion(cell.sigma2, cell.df, InfoCriterion::Cp, design.n, design.p,
                                      path.sigma_u);
      cell.hscore = hscore(cell.fit, design, y, grid.hscore_form);
      cell.hscore_unstable = cell.sigma2 <= floor * (1.0 + 1e-10);
    } catch (const std::exception&) {
      cell.failed = true;
      ++n_failed;
    }
    path.cells.push_back(std::move(cell));
    if (!path.cells.back().failed) warm = &path.cells.back().fit;
  }
  if (n_failed == static_cast<int>(path.cells.size())) {
    path.failed = true;
    throw NumericalError("every lambda cell failed at nu = " + std::to_string(nu));
  }
  return path;
}

std::vector<LambdaPath> scan_paths(const CenteredDesign& design, const Eigen::VectorXd& y,
                                   PenaltyKind kind, const SelectionGrid& grid,
                                   const FitConfig& config, int threads, double shape) {
  grid.validate();
  if (shape < 0.0) shape = default_penalty_shape(kind);
  std::vector<LambdaPath> paths(grid.nus.size());
  std::vector<std::string> errors(grid.nus.size());
  parallel_for(static_cast<int>(grid.nus.size()), threads, [&](int i) {
    try {
      paths[static_cast<size_t>(i)] =
          select_lambda(design, y, grid.nus[static_cast<size_t>(i)], kind, grid, config, shape);
    } catch (const std::exception& e) {
      paths[static_cast<size_t>(i)].nu = grid.nus[static_cast<size_t>(i)];
      paths[static_cast<size_t>(i)].failed = true;
      errors[static_cast<size_t>(i)] = e.what();
    }
  });
  bool any_ok = false;
  for (const auto& p : paths) any_ok = any_ok || !p.failed;
  if (!any_ok) {
    throw NumericalError("grid search failed for every nu; first error: " + errors.front());
  }
  return paths;
}

SelectionReport choose_from_scan(const std::vector<LambdaPath>& paths, InfoCriterion ic,
                                 PenaltyKind kind, double shape, HScoreForm form) {
  SelectionReport report;
  report.penalty_kind = kind;
  report.shape = shape < 0.0 ? default_penalty_shape(kind) : shape;
  report.ic = ic;
  report.hscore_form = form;
  report.paths = paths;
  report.chosen_lambda_per_nu.assign(paths.size(), -1);

  double best_score = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].failed) continue;
    const int li = paths[i].chosen(ic);
    report.chosen_lambda_per_nu[i] = li;
    if (li < 0) continue;
    const GridCell& cell = paths[i].cells[static_cast<size_t>(li)];
    if (std::isfinite(cell.hscore) && cell.hscore < best_score) {
      best_score = cell.hscore;
      report.chosen_nu_index = static_cast<int>(i);
    }
  }
  if (report.chosen_nu_index < 0) {
    throw NumericalError("model selection failed: no usable (lambda, nu) cell");
  }
  report.final_fit = report.chosen_cell().fit;
  return report;
}

SelectionReport select_nu(const CenteredDesign& design, const Eigen::VectorXd& y, PenaltyKind kind,
                          const SelectionGrid& grid, const FitConfig& config, int threads,
                          double shape) {
  const std::vector<LambdaPath> paths = scan_paths(design, y, kind, grid, config, threads, shape);
  return choose_from_scan(paths, grid.ic, kind, shape, grid.hscore_form);
}

}  // namespace robadd
