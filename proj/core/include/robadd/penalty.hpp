#pragma once

#include <Eigen/Core>
#include <string>

namespace robadd {

enum class PenaltyKind { Scad, Mcp, GroupLasso };

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(const std::string& s);

/// Folded-concave group penalty: family, level lambda and shape constant a
/// (SCAD needs a > 2, MCP a > 1; ignored for the group lasso).
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::Scad;
  double lambda = 0.0;
  double shape = 3.7;

  static PenaltySpec scad(double lambda, double shape = 3.7);
  static PenaltySpec mcp(double lambda, double shape = 3.0);
  static PenaltySpec group_lasso(double lambda);

  void validate() const;
};

/// P_lambda(t) for t >= 0.
/// SCAD: lambda*t on [0,lambda], quadratic blend on (lambda, a*lambda],
/// constant (a+1)lambda^2/2 beyond. MCP: lambda*t - t^2/(2a) up to a*lambda,
/// then a*lambda^2/2. Group lasso: lambda*t.
double penalty_value(double t, const PenaltySpec& spec);

/// P'_lambda(t); at t = 0 the right limit P'(0+) = lambda for all families.
double penalty_derivative(double t, const PenaltySpec& spec);

/// Second derivative where it exists (a.e. for SCAD/MCP).
double penalty_second_derivative(double t, const PenaltySpec& spec);

/// Multivariate soft threshold S(x,t) = (1 - t/||x||)_+ x.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& x, double t);

/// Group SCAD threshold F^SCAD_{lambda,gamma}; the proximal map of the SCAD
/// penalty of the Euclidean norm. Requires gamma > 2.
Eigen::VectorXd scad_threshold(const Eigen::VectorXd& x, double lambda, double gamma);

/// Group MCP (firm) threshold: S(x,lambda)*gamma/(gamma-1) for
/// ||x|| <= gamma*lambda, identity beyond. Requires gamma > 1.
Eigen::VectorXd mcp_threshold(const Eigen::VectorXd& x, double lambda, double gamma);

/// argmin_z 1/2 ||z - v||^2 + weight * P_lambda(||z||). Exact for any
/// weight > 0 by enumerating the stationary points of the piecewise
/// quadratic scalar problem. weight = 1 coincides with the closed-form
/// threshold operators above.
Eigen::VectorXd group_prox(const Eigen::VectorXd& v, const PenaltySpec& spec, double weight = 1.0);

/// sqrt(beta^T D beta) for symmetric positive definite D, via Cholesky.
double gram_norm(const Eigen::VectorXd& beta, const Eigen::MatrixXd& D);

}  // namespace robadd
