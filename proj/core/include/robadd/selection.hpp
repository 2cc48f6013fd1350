#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "robadd/design.hpp"
#include "robadd/solver.hpp"

namespace robadd {

enum class InfoCriterion { Aic, Bic, Ebic, Cp };

std::string to_string(InfoCriterion ic);
InfoCriterion ic_from_string(const std::string& s);

/// How the Hyvarinen score is assembled. Derivative builds it from the first
/// and second y-derivatives of the per-observation loss; PaperPrinted keeps
/// the simplified closed form as printed, which halves the weight of the
/// (nu r^2 - sigma^2) part.
enum class HScoreForm { Derivative, PaperPrinted };

struct SelectionGrid {
  std::vector<double> nus{0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> lambdas;  // explicit descending grid; empty = auto per nu
  int lambda_grid_size = 30;
  double lambda_min_ratio = 1e-3;
  InfoCriterion ic = InfoCriterion::Ebic;
  HScoreForm hscore_form = HScoreForm::Derivative;

  void validate() const;
};

/// AIC/BIC/EBIC/Cp at the fitted scale and degrees of freedom. sigma_u is
/// the robust full-model scale (needed for Cp only).
double information_criterion(double sigma2_hat, int df, InfoCriterion kind, int n, int p,
                             double sigma_u = 0.0);

/// Hyvarinen score of a fitted model. sigma2_floor_hit is set when the fit's
/// scale sits on its lower bound (score unstable in that regime).
double hscore(const ModelFit& fit, const CenteredDesign& design, const Eigen::VectorXd& y,
              HScoreForm form = HScoreForm::Derivative);

/// One cell of the (lambda, nu) grid.
struct GridCell {
  double nu = 0.0;
  double lambda = 0.0;
  bool converged = false;
  bool failed = false;  // the fit threw; excluded from selection
  int df = 0;
  double sigma2 = 0.0;
  double objective = 0.0;
  double aic = 0.0, bic = 0.0, ebic = 0.0, cp = 0.0;
  double hscore = 0.0;
  bool hscore_unstable = false;
  std::vector<int> active_set;
  ModelFit fit;

  double ic_value(InfoCriterion kind) const;
};

/// Descending-lambda path at one nu, fitted with warm starts.
struct LambdaPath {
  double nu = 0.0;
  double sigma_u = 0.0;  // robust full-model scale at this nu
  bool failed = false;
  std::vector<GridCell> cells;

  /// Index of the converged cell minimizing the criterion; ties break toward
  /// larger lambda. -1 when no cell is usable.
  int chosen(InfoCriterion kind) const;
};

struct SelectionReport {
  PenaltyKind penalty_kind = PenaltyKind::Scad;
  double shape = 3.7;
  InfoCriterion ic = InfoCriterion::Ebic;
  HScoreForm hscore_form = HScoreForm::Derivative;
  std::vector<LambdaPath> paths;            // one per nu, ascending nu
  std::vector<int> chosen_lambda_per_nu;    // index into each path, -1 if none
  int chosen_nu_index = -1;
  ModelFit final_fit;

  double chosen_nu() const;
  double chosen_lambda() const;
  const GridCell& chosen_cell() const;
};

double default_penalty_shape(PenaltyKind kind);

/// Descending log-spaced grid from lambda_max down to min_ratio*lambda_max.
std::vector<double> make_lambda_grid(double lambda_max_value, int size, double min_ratio);

/// Robust scale estimate from the unpenalized full-model MDPDE at this nu.
double robust_sigma_u(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                      const FitConfig& config = {});

/// Fit the descending-lambda path at one nu. Per-cell failures are recorded;
/// throws NumericalError only when every cell fails.
LambdaPath select_lambda(const CenteredDesign& design, const Eigen::VectorXd& y, double nu,
                         PenaltyKind kind, const SelectionGrid& grid, const FitConfig& config = {},
                         double shape = -1.0);

/// Fit all nu paths (parallel across nu; warm-start chains stay sequential
/// within each path).
std::vector<LambdaPath> scan_paths(const CenteredDesign& design, const Eigen::VectorXd& y,
                                   PenaltyKind kind, const SelectionGrid& grid,
                                   const FitConfig& config = {}, int threads = 1,
                                   double shape = -1.0);

/// Assemble the report for one criterion from a finished scan: pick lambda
/// per nu by the criterion, then nu by the Hyvarinen score of the chosen fits.
SelectionReport choose_from_scan(const std::vector<LambdaPath>& paths, InfoCriterion ic,
                                 PenaltyKind kind, double shape, HScoreForm form);

/// Full grid search: lambda by the information criterion, nu by the
/// Hyvarinen score.
SelectionReport select_nu(const CenteredDesign& design, const Eigen::VectorXd& y, PenaltyKind kind,
                          const SelectionGrid& grid, const FitConfig& config = {}, int threads = 1,
                          double shape = -1.0);

}  // namespace robadd
