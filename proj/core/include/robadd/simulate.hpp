#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "robadd/selection.hpp"
#include "robadd/solver.hpp"

namespace robadd {

enum class ErrorKind { Gaussian, ContaminatedGaussian, Cauchy, ChiSq1 };

std::string to_string(ErrorKind kind);
ErrorKind error_kind_from_string(const std::string& s);

/// Synthetic experiment definition: correlated uniform covariates, eight
/// random nonzero components, contamination mixtures and heavy-tail errors.
struct Scenario {
  int n = 250;
  int p = 15;
  int q = 8;  // nonzero additive components
  double rho = 0.5;
  ErrorKind error = ErrorKind::Gaussian;
  double sigma = 1.0;
  double contam_frac = 0.05;
  double contam_shift = 8.0;
  int n_test = 1000;
  int n_replicates = 20;
  double trim_fraction = 0.05;
  std::uint64_t seed = 20240915;
  int basis_order = 4;
  int basis_dim = 5;
  double cauchy_clip = 1e6;
  // selection settings
  std::vector<double> nu_grid{0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0};
  int lambda_grid_size = 30;
  double lambda_min_ratio = 1e-3;

  void validate() const;
};

/// Parse a plain key = value scenario file ('#' starts a comment).
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);

enum class ComponentShape { Sin, Cos, Exp, Linear };

/// Eight nonzero components placed on random slots: two sin(2*pi*x), two
/// cos(2*pi*x), two exp(x), two x, with coefficients split between U(1,2)
/// and U(-2,-1). Components are centered by their training-sample means so
/// they have mean zero as the model requires; the offsets are frozen and
/// reused for test data.
struct TrueModel {
  std::vector<int> active;            // slot indices, size q
  std::vector<ComponentShape> shape;  // size q
  Eigen::VectorXd coeff;              // size q
  Eigen::VectorXd offset;             // size q, centering constants
  double sigma_true = 1.0;

  double component(int k, double x) const;
  Eigen::VectorXd signal(const Eigen::MatrixXd& X_unit) const;
};

/// N_p(0, Sigma) draws with Sigma_ij = rho^|i-j| pushed through the standard
/// normal CDF, so every covariate is uniform on (0,1) with residual
/// correlation.
Eigen::MatrixXd gen_covariates(int n, int p, double rho, std::mt19937_64& rng);

TrueModel gen_true_model(const Scenario& scenario, std::mt19937_64& rng);
void center_components(TrueModel& model, const Eigen::MatrixXd& X_train);

/// Error draws for one dataset. ContaminatedGaussian substitutes N(shift,
/// sigma^2) draws on a Bernoulli(contam_frac) mask; Cauchy draws are clipped
/// at +-cauchy_clip.
Eigen::VectorXd gen_errors(int n, ErrorKind kind, const Scenario& scenario, std::mt19937_64& rng);

/// y = signal + errors with the scenario's training error law.
Eigen::VectorXd gen_response(const Eigen::MatrixXd& X_unit, const TrueModel& model,
                             ErrorKind kind, const Scenario& scenario, std::mt19937_64& rng);

/// Error law used for test data: pure Gaussian unless the training law is
/// heavy-tailed (Cauchy, chi-square), which keeps its own law.
ErrorKind test_error_kind(ErrorKind training);

// --- metrics -------------------------------------------------------------

double compute_rpe(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y_test, double sigma_true2);
double compute_trimmed_mpe(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y_test, double omega);
std::pair<double, double> compute_rmpe_mad(const Eigen::VectorXd& yhat,
                                           const Eigen::VectorXd& y_test);

struct SelectionMetrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double dim_reduction = 0.0;
  bool degenerate_specificity = false;  // p == q
};
SelectionMetrics compute_selection_metrics(const std::vector<int>& active_set,
                                           const std::vector<int>& true_active, int p);

double compute_mse_sigma(const std::vector<double>& sigma_hats, double sigma_true);

// --- experiment harness ---------------------------------------------------

enum class EstimatorKind {
  DpdPath,      // SCAD path over (lambda, nu); lambda by IC, nu by H-score
  GroupLasso,   // nu = 0 group-lasso path, lambda by IC
  SplineLs,     // unpenalized nu = 0 spline least squares
  InterceptOnly,
  Oracle        // predicts with the true component functions
};

struct EstimatorSpec {
  std::string name;
  EstimatorKind kind = EstimatorKind::DpdPath;
  InfoCriterion ic = InfoCriterion::Bic;

  static EstimatorSpec parse(const std::string& token);
};

std::vector<EstimatorSpec> parse_estimators(const std::string& comma_list);

struct ReplicateResult {
  bool failed = false;
  std::string error;
  double rpe = 0.0;
  double mpe_full = 0.0;
  double mpe_trimmed = 0.0;
  double rmpe = 0.0;
  double mad = 0.0;
  double sigma_hat = 0.0;
  bool has_sigma = false;
  bool has_selection = false;
  SelectionMetrics selection;
  double selected_nu = 0.0;
  double selected_lambda = 0.0;
  bool has_rpe = false;  // false for heavy-tail scenarios (MPE replaces it)
};

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct EstimatorSummary {
  EstimatorSpec spec;
  std::vector<ReplicateResult> replicates;
  Stat rpe, mpe_full, mpe_trimmed, rmpe, mad;
  Stat sensitivity, specificity, dim_reduction;
  Stat selected_nu;
  Stat mse_sigma;  // mean/SD of (sigma_hat - sigma)^2; skipped for heavy tails
  int failures = 0;
};

struct MetricsReport {
  Scenario scenario;
  std::vector<EstimatorSummary> estimators;
  Stat snr;
};

/// Replicated experiment: fresh training draw, pure test draw, every
/// estimator fitted and scored. Replicates run in parallel on independent
/// seeded streams; results are deterministic for a fixed seed regardless of
/// the thread count.
MetricsReport run_experiment(const Scenario& scenario, const std::vector<EstimatorSpec>& estimators,
                             const FitConfig& config = {}, int threads = 1);

/// Aligned human-readable table (mean row, SD row) in the style of the
/// simulation tables.
std::string format_metrics_table(const MetricsReport& report);

/// Machine-readable CSV, one row per estimator.
void write_metrics_csv(const MetricsReport& report, std::ostream& out);

/// Numerically stable pairwise sum (aggregation is order-independent).
double pairwise_sum(const std::vector<double>& values);

}  // namespace robadd
