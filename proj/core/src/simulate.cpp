#include "robadd/simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "robadd/parallel.hpp"
#include "robadd/rng.hpp"

namespace robadd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double variance_of(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / std::max<double>(1.0, static_cast<double>(v.size() - 1));
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

double stdnormal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::string to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Gaussian: return "gaussian";
    case ErrorKind::ContaminatedGaussian: return "contaminated";
    case ErrorKind::Cauchy: return "cauchy";
    case ErrorKind::ChiSq1: return "chisq1";
  }
  return "gaussian";
}

ErrorKind error_kind_from_string(const std::string& s) {
  if (s == "gaussian" || s == "normal") return ErrorKind::Gaussian;
  if (s == "contaminated" || s == "contaminated_gaussian") return ErrorKind::ContaminatedGaussian;
  if (s == "cauchy") return ErrorKind::Cauchy;
  if (s == "chisq1" || s == "chisq") return ErrorKind::ChiSq1;
  throw std::invalid_argument("unknown error kind: " + s);
}

void Scenario::validate() const {
  if (n < 2 || n_test < 1 || n_replicates < 1) throw std::invalid_argument("counts must be positive");
  if (q < 1 || q > p) throw std::invalid_argument("need 1 <= q <= p");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (!(contam_frac >= 0.0 && contam_frac < 0.5)) {
    throw std::invalid_argument("contamination fraction must lie in [0, 0.5)");
  }
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
  }
  if (basis_order < 1 || basis_dim < basis_order - 1) throw std::invalid_argument("bad basis settings");
  if (nu_grid.empty()) throw std::invalid_argument("nu grid is empty");
}

Scenario parse_scenario(std::istream& in) {
  Scenario sc;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "n") sc.n = std::stoi(value);
      else if (key == "p") sc.p = std::stoi(value);
      else if (key == "q") sc.q = std::stoi(value);
      else if (key == "rho") sc.rho = std::stod(value);
      else if (key == "error") sc.error = error_kind_from_string(value);
      else if (key == "sigma") sc.sigma = std::stod(value);
      else if (key == "contam_frac") sc.contam_frac = std::stod(value);
      else if (key == "contam_shift") sc.contam_shift = std::stod(value);
      else if (key == "n_test") sc.n_test = std::stoi(value);
      else if (key == "replicates") sc.n_replicates = std::stoi(value);
      else if (key == "trim_fraction") sc.trim_fraction = std::stod(value);
      else if (key == "seed") sc.seed = std::stoull(value);
      else if (key == "basis_order") sc.basis_order = std::stoi(value);
      else if (key == "basis_dim") sc.basis_dim = std::stoi(value);
      else if (key == "cauchy_clip") sc.cauchy_clip = std::stod(value);
      else if (key == "nu_grid") sc.nu_grid = parse_double_list(value);
      else if (key == "lambda_grid_size") sc.lambda_grid_size = std::stoi(value);
      else if (key == "lambda_min_ratio") sc.lambda_min_ratio = std::stod(value);
      else throw std::invalid_argument("unknown scenario key: " + key);
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      throw std::invalid_argument("scenario line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  return parse_scenario(in);
}

double TrueModel::component(int k, double x) const {
  const double a = coeff[k];
  double raw = 0.0;
  switch (shape[static_cast<size_t>(k)]) {
    case ComponentShape::Sin: raw = a * std::sin(2.0 * M_PI * x); break;
    case ComponentShape::Cos: raw = a * std::cos(2.0 * M_PI * x); break;
    case ComponentShape::Exp: raw = a * std::exp(x); break;
    case ComponentShape::Linear: raw = a * x; break;
  }
  return raw - offset[k];
}

Eigen::VectorXd TrueModel::signal(const Eigen::MatrixXd& X_unit) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(X_unit.rows());
  for (size_t k = 0; k < active.size(); ++k) {
    const int col = active[k];
    for (Eigen::Index i = 0; i < X_unit.rows(); ++i) {
      s[i] += component(static_cast<int>(k), X_unit(i, col));
    }
  }
  return s;
}

Eigen::MatrixXd gen_covariates(int n, int p, double rho, std::mt19937_64& rng) {
  Eigen::MatrixXd Sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) Sigma(i, j) = std::pow(rho, std::abs(i - j));
  }
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(Sigma).matrixL();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z[j] = normal(rng);
    const Eigen::VectorXd x = L * z;
    for (int j = 0; j < p; ++j) X(i, j) = stdnormal_cdf(x[j]);
  }
  return X;
}

TrueModel gen_true_model(const Scenario& scenario, std::mt19937_64& rng) {
  if (scenario.p < scenario.q) throw std::invalid_argument("need p >= q");
  TrueModel model;
  model.sigma_true = scenario.sigma;

  std::vector<int> slots(static_cast<size_t>(scenario.p));
  std::iota(slots.begin(), slots.end(), 0);
  std::shuffle(slots.begin(), slots.end(), rng);
  model.active.assign(slots.begin(), slots.begin() + scenario.q);

  // Shape library cycled in pairs: sin, sin, cos, cos, exp, exp, x, x.
  static const ComponentShape library[8] = {
      ComponentShape::Sin, ComponentShape::Sin, ComponentShape::Cos, ComponentShape::Cos,
      ComponentShape::Exp, ComponentShape::Exp, ComponentShape::Linear, ComponentShape::Linear};
  model.shape.resize(static_cast<size_t>(scenario.q));
  for (int k = 0; k < scenario.q; ++k) model.shape[static_cast<size_t>(k)] = library[k % 8];

  // Half the coefficients from U(1,2), the other half from U(-2,-1),
  // assigned to random components.
  std::vector<int> sign_order(static_cast<size_t>(scenario.q));
  std::iota(sign_order.begin(), sign_order.end(), 0);
  std::shuffle(sign_order.begin(), sign_order.end(), rng);
  std::uniform_real_distribution<double> mag(1.0, 2.0);
  model.coeff.resize(scenario.q);
  for (int k = 0; k < scenario.q; ++k) {
    const double a = mag(rng);
    model.coeff[sign_order[static_cast<size_t>(k)]] = (k < scenario.q / 2) ? a : -a;
  }
  model.offset = Eigen::VectorXd::Zero(scenario.q);
  return model;
}

void center_components(TrueModel& model, const Eigen::MatrixXd& X_train) {
  model.offset.setZero();
  for (size_t k = 0; k < model.active.size(); ++k) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < X_train.rows(); ++i) {
      acc += model.component(static_cast<int>(k), X_train(i, model.active[k]));
    }
    model.offset[static_cast<Eigen::Index>(k)] = acc / static_cast<double>(X_train.rows());
  }
}

Eigen::VectorXd gen_errors(int n, ErrorKind kind, const Scenario& scenario, std::mt19937_64& rng) {
  Eigen::VectorXd e(n);
  switch (kind) {
    case ErrorKind::Gaussian: {
      std::normal_distribution<double> normal(0.0, scenario.sigma);
      for (int i = 0; i < n; ++i) e[i] = normal(rng);
      break;
    }
    case ErrorKind::ContaminatedGaussian: {
      std::normal_distribution<double> clean(0.0, scenario.sigma);
      std::normal_distribution<double> outlier(scenario.contam_shift, scenario.sigma);
      std::bernoulli_distribution mask(scenario.contam_frac);
      for (int i = 0; i < n; ++i) e[i] = mask(rng) ? outlier(rng) : clean(rng);
      break;
    }
    case ErrorKind::Cauchy: {
      std::cauchy_distribution<double> cauchy(0.0, 1.0);
      for (int i = 0; i < n; ++i) {
        e[i] = std::clamp(cauchy(rng), -scenario.cauchy_clip, scenario.cauchy_clip);
      }
      break;
    }
    case ErrorKind::ChiSq1: {
      std::chi_squared_distribution<double> chisq(1.0);
      for (int i = 0; i < n; ++i) e[i] = chisq(rng);
      break;
    }
  }
  return e;
}

Eigen::VectorXd gen_response(const Eigen::MatrixXd& X_unit, const TrueModel& model,
                             ErrorKind kind, const Scenario& scenario, std::mt19937_64& rng) {
  return model.signal(X_unit) + gen_errors(static_cast<int>(X_unit.rows()), kind, scenario, rng);
}

ErrorKind test_error_kind(ErrorKind training) {
  switch (training) {
    case ErrorKind::Gaussian:
    case ErrorKind::ContaminatedGaussian:
      return ErrorKind::Gaussian;
    case ErrorKind::Cauchy:
    case ErrorKind::ChiSq1:
      return training;
  }
  return ErrorKind::Gaussian;
}

double compute_rpe(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y_test, double sigma_true2) {
  if (yhat.size() != y_test.size()) throw std::invalid_argument("compute_rpe: length mismatch");
  if (!(sigma_true2 > 0.0)) throw std::invalid_argument("compute_rpe: sigma^2 must be > 0");
  return (yhat - y_test).squaredNorm() / (sigma_true2 * static_cast<double>(y_test.size()));
}

double compute_trimmed_mpe(const Eigen::VectorXd& yhat, const Eigen::VectorXd& y_test, double omega) {
  if (yhat.size() != y_test.size()) throw std::invalid_argument("compute_trimmed_mpe: length mismatch");
  if (!(omega >= 0.0 && omega < 0.5)) throw std::invalid_argument("trim fraction must lie in [0, 0.5)");
  const Eigen::Index n = y_test.size();
  std::vector<double> abs_err(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) abs_err[static_cast<size_t>(i)] = std::abs(yhat[i] - y_test[i]);
  const Eigen::Index drop = static_cast<Eigen::Index>(std::ceil(omega * static_cast<double>(n)));
  const Eigen::Index keep = n - drop;
  if (keep < 1) throw std::invalid_argument("trim fraction leaves no observations");
  std::nth_element(abs_err.begin(), abs_err.begin() + (keep - 1), abs_err.end());
  const double cutoff = abs_err[static_cast<size_t>(keep - 1)];
  // Average squared error over the `keep` smallest absolute errors; ties at
  // the cutoff are taken in index order.
  double acc = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = std::abs(yhat[i] - y_test[i]);
    if (a < cutoff) {
      acc += a * a;
      ++used;
    }
  }
  for (Eigen::Index i = 0; i < n && used < keep; ++i) {
    const double a = std::abs(yhat[i] - y_test[i]);
    if (a == cutoff) {
      acc += a * a;
      ++used;
    }
  }
  return acc / static_cast<double>(keep);
}

std::pair<double, double> compute_rmpe_mad(const Eigen::VectorXd& yhat,
                                           const Eigen::VectorXd& y_test) {
  if (yhat.size() != y_test.size()) throw std::invalid_argument("compute_rmpe_mad: length mismatch");
  const Eigen::VectorXd err = yhat - y_test;
  const double rmpe = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
  const double mad = err.array().abs().mean();
  return {rmpe, mad};
}

SelectionMetrics compute_selection_metrics(const std::vector<int>& active_set,
                                           const std::vector<int>& true_active, int p) {
  if (true_active.empty()) throw std::invalid_argument("true active set must be non-empty");
  const int q = static_cast<int>(true_active.size());
  std::vector<char> est(static_cast<size_t>(p), 0), truth(static_cast<size_t>(p), 0);
  for (int j : active_set) est[static_cast<size_t>(j)] = 1;
  for (int j : true_active) truth[static_cast<size_t>(j)] = 1;
  int tp = 0, tn = 0;
  for (int j = 0; j < p; ++j) {
    if (truth[static_cast<size_t>(j)] && est[static_cast<size_t>(j)]) ++tp;
    if (!truth[static_cast<size_t>(j)] && !est[static_cast<size_t>(j)]) ++tn;
  }
  SelectionMetrics out;
  out.sensitivity = static_cast<double>(tp) / q;
  if (p == q) {
    out.specificity = 1.0;
    out.degenerate_specificity = true;
  } else {
    out.specificity = static_cast<double>(tn) / (p - q);
  }
  out.dim_reduction = 100.0 * static_cast<double>(p - static_cast<int>(active_set.size())) / p;
  return out;
}

double compute_mse_sigma(const std::vector<double>& sigma_hats, double sigma_true) {
  if (sigma_hats.empty()) throw std::invalid_argument("no sigma estimates");
  std::vector<double> sq(sigma_hats.size());
  for (size_t i = 0; i < sigma_hats.size(); ++i) {
    const double d = sigma_hats[i] - sigma_true;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(sq.size());
}

double pairwise_sum(const std::vector<double>& values) {
  // Recursive pairwise reduction; order-independent given fixed slot order.
  struct Impl {
    static double sum(const double* v, size_t n) {
      if (n == 0) return 0.0;
      if (n <= 8) {
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) acc += v[i];
        return acc;
      }
      const size_t half = n / 2;
      return sum(v, half) + sum(v + half, n - half);
    }
  };
  return Impl::sum(values.data(), values.size());
}

EstimatorSpec EstimatorSpec::parse(const std::string& token) {
  EstimatorSpec spec;
  spec.name = token;
  if (token.rfind("dpd_", 0) == 0) {
    spec.kind = EstimatorKind::DpdPath;
    spec.ic = ic_from_string(token.substr(4));
    return spec;
  }
  if (token == "glasso" || token.rfind("glasso_", 0) == 0) {
    spec.kind = EstimatorKind::GroupLasso;
    spec.ic = token == "glasso" ? InfoCriterion::Bic : ic_from_string(token.substr(7));
    return spec;
  }
  if (token == "spline_ls" || token == "ols") {
    spec.kind = EstimatorKind::SplineLs;
    return spec;
  }
  if (token == "intercept") {
    spec.kind = EstimatorKind::InterceptOnly;
    return spec;
  }
  if (token == "oracle") {
    spec.kind = EstimatorKind::Oracle;
    return spec;
  }
  throw std::invalid_argument("unknown estimator: " + token);
}

std::vector<EstimatorSpec> parse_estimators(const std::string& comma_list) {
  std::vector<EstimatorSpec> out;
  std::stringstream ss(comma_list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(EstimatorSpec::parse(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty estimator list");
  return out;
}

namespace {

Stat make_stat(const std::vector<double>& values) {
  Stat s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) {
    s.mean = kNaN;
    s.sd = kNaN;
    return s;
  }
  s.mean = pairwise_sum(values) / static_cast<double>(values.size());
  if (values.size() < 2) {
    s.sd = 0.0;
    return s;
  }
  std::vector<double> dev(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - s.mean;
    dev[i] = d * d;
  }
  s.sd = std::sqrt(pairwise_sum(dev) / static_cast<double>(values.size() - 1));
  return s;
}

struct ReplicateData {
  Eigen::MatrixXd X_train, X_test;
  Eigen::VectorXd y_train, y_test;
  TrueModel model;
  double snr = 0.0;
};

ReplicateData make_replicate_data(const Scenario& sc, int rep) {
  ReplicateData d;
  auto cov_rng = make_stream(sc.seed, static_cast<std::uint64_t>(rep), 1);
  auto model_rng = make_stream(sc.seed, static_cast<std::uint64_t>(rep), 2);
  auto err_rng = make_stream(sc.seed, static_cast<std::uint64_t>(rep), 3);
  auto tcov_rng = make_stream(sc.seed, static_cast<std::uint64_t>(rep), 4);
  auto terr_rng = make_stream(sc.seed, static_cast<std::uint64_t>(rep), 5);

  d.X_train = gen_covariates(sc.n, sc.p, sc.rho, cov_rng);
  d.model = gen_true_model(sc, model_rng);
  center_components(d.model, d.X_train);
  d.y_train = gen_response(d.X_train, d.model, sc.error, sc, err_rng);
  d.X_test = gen_covariates(sc.n_test, sc.p, sc.rho, tcov_rng);
  d.y_test = gen_response(d.X_test, d.model, test_error_kind(sc.error), sc, terr_rng);
  d.snr = variance_of(d.model.signal(d.X_train)) / (sc.sigma * sc.sigma);
  return d;
}

}  // namespace

MetricsReport run_experiment(const Scenario& scenario, const std::vector<EstimatorSpec>& estimators,
                             const FitConfig& config, int threads) {
  scenario.validate();
  if (estimators.empty()) throw std::invalid_argument("no estimators requested");

  const SplineBasis basis = SplineBasis::with_dim(scenario.basis_dim, scenario.basis_order);
  const bool heavy = scenario.error == ErrorKind::Cauchy || scenario.error == ErrorKind::ChiSq1;
  const int S = scenario.n_replicates;
  const size_t n_est = estimators.size();

  std::vector<std::vector<ReplicateResult>> results(n_est);
  for (auto& v : results) v.resize(static_cast<size_t>(S));
  std::vector<double> snrs(static_cast<size_t>(S), kNaN);

  parallel_for(S, threads, [&](int rep) {
    const ReplicateData data = make_replicate_data(scenario, rep);
    snrs[static_cast<size_t>(rep)] = data.snr;
    const CenteredDesign design = build_design(data.X_train, basis);
    std::vector<int> true_active = data.model.active;
    std::sort(true_active.begin(), true_active.end());

    const auto score = [&](const Eigen::VectorXd& yhat, ReplicateResult& out) {
      if (!heavy) {
        out.rpe = compute_rpe(yhat, data.y_test, scenario.sigma * scenario.sigma);
        out.has_rpe = true;
      }
      out.mpe_full = compute_trimmed_mpe(yhat, data.y_test, 0.0);
      out.mpe_trimmed = compute_trimmed_mpe(yhat, data.y_test, scenario.trim_fraction);
      const auto [rmpe, mad] = compute_rmpe_mad(yhat, data.y_test);
      out.rmpe = rmpe;
      out.mad = mad;
    };
    const auto score_fit = [&](const ModelFit& fit, ReplicateResult& out, bool sparse) {
      score(predict(fit, data.X_test).yhat, out);
      if (!heavy) {
        out.sigma_hat = std::sqrt(fit.sigma2);
        out.has_sigma = true;
      }
      if (sparse) {
        out.selection = compute_selection_metrics(fit.active_set, true_active, scenario.p);
        out.has_selection = true;
      }
    };

    SelectionGrid grid;
    grid.nus = scenario.nu_grid;
    grid.lambda_grid_size = scenario.lambda_grid_size;
    grid.lambda_min_ratio = scenario.lambda_min_ratio;

    // The DPD estimators share one (lambda, nu) scan per replicate.
    std::vector<LambdaPath> dpd_paths;
    bool dpd_scan_ok = false;
    std::string dpd_scan_error;
    const bool any_dpd = std::any_of(estimators.begin(), estimators.end(), [](const auto& e) {
      return e.kind == EstimatorKind::DpdPath;
    });
    if (any_dpd) {
      try {
        dpd_paths = scan_paths(design, data.y_train, PenaltyKind::Scad, grid, config, 1);
        dpd_scan_ok = true;
      } catch (const std::exception& e) {
        dpd_scan_error = e.what();
      }
    }

    for (size_t e = 0; e < n_est; ++e) {
      ReplicateResult& out = results[e][static_cast<size_t>(rep)];
      try {
        switch (estimators[e].kind) {
          case EstimatorKind::DpdPath: {
            if (!dpd_scan_ok) throw NumericalError(dpd_scan_error);
            const SelectionReport report = choose_from_scan(
                dpd_paths, estimators[e].ic, PenaltyKind::Scad, -1.0, grid.hscore_form);
            score_fit(report.final_fit, out, true);
            out.selected_nu = report.chosen_nu();
            out.selected_lambda = report.chosen_lambda();
            break;
          }
          case EstimatorKind::GroupLasso: {
            SelectionGrid g0 = grid;
            g0.nus = {0.0};
            g0.ic = estimators[e].ic;
            const SelectionReport report =
                select_nu(design, data.y_train, PenaltyKind::GroupLasso, g0, config, 1);
            score_fit(report.final_fit, out, true);
            out.selected_nu = 0.0;
            out.selected_lambda = report.chosen_lambda();
            break;
          }
          case EstimatorKind::SplineLs: {
            const ModelFit fit = fit_unpenalized(design, data.y_train, 0.0, config);
            score_fit(fit, out, false);
            break;
          }
          case EstimatorKind::InterceptOnly: {
            const double mu = data.y_train.mean();
            score(Eigen::VectorXd::Constant(data.y_test.size(), mu), out);
            if (!heavy) {
              out.sigma_hat = std::sqrt(variance_of(data.y_train));
              out.has_sigma = true;
            }
            out.selection = compute_selection_metrics({}, true_active, scenario.p);
            out.has_selection = true;
            break;
          }
          case EstimatorKind::Oracle: {
            score(data.model.signal(data.X_test), out);
            break;
          }
        }
      } catch (const std::exception& err) {
        out.failed = true;
        out.error = err.what();
      }
    }
  });

  MetricsReport report;
  report.scenario = scenario;
  report.snr = make_stat(snrs);
  report.estimators.resize(n_est);
  for (size_t e = 0; e < n_est; ++e) {
    EstimatorSummary& summary = report.estimators[e];
    summary.spec = estimators[e];
    summary.replicates = std::move(results[e]);
    std::vector<double> rpe, mpa, mpt, rmpe, mad, sens, spec, dimred, nus, sigsq;
    for (const ReplicateResult& r : summary.replicates) {
      if (r.failed) {
        ++summary.failures;
        continue;
      }
      if (r.has_rpe) rpe.push_back(r.rpe);
      mpa.push_back(r.mpe_full);
      mpt.push_back(r.mpe_trimmed);
      rmpe.push_back(r.rmpe);
      mad.push_back(r.mad);
      if (r.has_selection) {
        sens.push_back(r.selection.sensitivity);
        spec.push_back(r.selection.specificity);
        dimred.push_back(r.selection.dim_reduction);
      }
      if (estimators[e].kind == EstimatorKind::DpdPath) nus.push_back(r.selected_nu);
      if (r.has_sigma) {
        const double d = r.sigma_hat - scenario.sigma;
        sigsq.push_back(d * d);
      }
    }
    summary.rpe = make_stat(rpe);
    summary.mpe_full = make_stat(mpa);
    summary.mpe_trimmed = make_stat(mpt);
    summary.rmpe = make_stat(rmpe);
    summary.mad = make_stat(mad);
    summary.sensitivity = make_stat(sens);
    summary.specificity = make_stat(spec);
    summary.dim_reduction = make_stat(dimred);
    summary.selected_nu = make_stat(nus);
    summary.mse_sigma = make_stat(sigsq);
  }
  return report;
}

namespace {

std::string fmt4(double v) {
  if (std::isnan(v)) return "--";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_row(std::string& out, const std::vector<std::string>& cells,
                const std::vector<size_t>& widths) {
  for (size_t i = 0; i < cells.size(); ++i) {
    const std::string& c = cells[i];
    out += c;
    if (i + 1 < cells.size()) out.append(widths[i] > c.size() ? widths[i] - c.size() + 2 : 2, ' ');
  }
  out += '\n';
}

}  // namespace

std::string format_metrics_table(const MetricsReport& report) {
  const bool heavy = report.scenario.error == ErrorKind::Cauchy ||
                     report.scenario.error == ErrorKind::ChiSq1;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"estimator"};
  if (heavy) {
    char trimmed[32];
    std::snprintf(trimmed, sizeof(trimmed), "mpe(%g%%)", 100.0 * report.scenario.trim_fraction);
    header.insert(header.end(), {trimmed, "mpe(full)", "sens", "spec", "dimred"});
  } else {
    header.insert(header.end(), {"rpe", "mse(sigma)", "sens", "spec", "dimred"});
  }
  rows.push_back(header);
  for (const EstimatorSummary& s : report.estimators) {
    std::vector<std::string> mean{s.spec.name};
    std::vector<std::string> sd{"  (sd)"};
    if (heavy) {
      mean.insert(mean.end(), {fmt4(s.mpe_trimmed.mean), fmt4(s.mpe_full.mean),
                               fmt4(s.sensitivity.mean), fmt4(s.specificity.mean),
                               fmt4(s.dim_reduction.mean)});
      sd.insert(sd.end(), {fmt4(s.mpe_trimmed.sd), fmt4(s.mpe_full.sd), fmt4(s.sensitivity.sd),
                           fmt4(s.specificity.sd), fmt4(s.dim_reduction.sd)});
    } else {
      mean.insert(mean.end(), {fmt4(s.rpe.mean), fmt4(s.mse_sigma.mean), fmt4(s.sensitivity.mean),
                               fmt4(s.specificity.mean), fmt4(s.dim_reduction.mean)});
      sd.insert(sd.end(), {fmt4(s.rpe.sd), fmt4(s.mse_sigma.sd), fmt4(s.sensitivity.sd),
                           fmt4(s.specificity.sd), fmt4(s.dim_reduction.sd)});
    }
    rows.push_back(mean);
    rows.push_back(sd);
  }
  std::vector<size_t> widths(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) append_row(out, r, widths);
  return out;
}

void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
  out << "estimator,replicates,failures,"
         "rpe_mean,rpe_sd,mpe_full_mean,mpe_full_sd,mpe_trimmed_mean,mpe_trimmed_sd,"
         "rmpe_mean,rmpe_sd,mad_mean,mad_sd,mse_sigma_mean,mse_sigma_sd,"
         "sensitivity_mean,sensitivity_sd,specificity_mean,specificity_sd,"
         "dim_reduction_mean,dim_reduction_sd,selected_nu_mean,selected_nu_sd,snr_mean\n";
  for (const EstimatorSummary& s : report.estimators) {
    out << s.spec.name << ',' << report.scenario.n_replicates << ',' << s.failures << ','
        << fmt17(s.rpe.mean) << ',' << fmt17(s.rpe.sd) << ',' << fmt17(s.mpe_full.mean) << ','
        << fmt17(s.mpe_full.sd) << ',' << fmt17(s.mpe_trimmed.mean) << ',' << fmt17(s.mpe_trimmed.sd)
        << ',' << fmt17(s.rmpe.mean) << ',' << fmt17(s.rmpe.sd) << ',' << fmt17(s.mad.mean) << ','
        << fmt17(s.mad.sd) << ',' << fmt17(s.mse_sigma.mean) << ',' << fmt17(s.mse_sigma.sd) << ','
        << fmt17(s.sensitivity.mean) << ',' << fmt17(s.sensitivity.sd) << ','
        << fmt17(s.specificity.mean) << ',' << fmt17(s.specificity.sd) << ','
        << fmt17(s.dim_reduction.mean) << ',' << fmt17(s.dim_reduction.sd) << ','
        << fmt17(s.selected_nu.mean) << ',' << fmt17(s.selected_nu.sd) << ','
        << fmt17(report.snr.mean) << '\n';
  }
}

}  // namespace robadd
