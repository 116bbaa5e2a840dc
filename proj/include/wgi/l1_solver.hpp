#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wgi/types.hpp"

namespace wgi {

/// Proximal map of t |.|_1, optionally restricted to the nonnegative orthant.
template <typename Derived>
auto soft_threshold(const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar t, bool nonnegative = false) {
  using S = typename Derived::Scalar;
  if (nonnegative) return (x - t).max(S(0)).eval();
  return (x.sign() * (x.abs() - t).max(S(0))).eval();
}

struct L1Options {
  /// Constrained mode: min |v|_1 s.t. |Av - b| <= epsilon. Takes precedence.
  std::optional<double> epsilon;
  /// Penalized mode: min 1/2 |Av - b|^2 + lambda |v|_1.
  std::optional<double> lambda;
  int max_iter = 20000;          // per penalized solve
  double tol = 1e-12;            // relative objective change
  bool nonnegative = false;
  double lambda_min_ratio = 1e-12;  // continuation floor relative to |A^T b|_inf
  double continuation_factor = 0.5;
  int power_iterations = 50;
  double step_safety = 0.9;
  bool polish = true;
  int polish_every = 100;
  double certificate_tol = 1e-6;
  double epsilon_rel_tol = 1e-3;  // bisection target: residual in [(1-tol) eps, eps]
  bool record_history = false;
};

struct L1Report {
  int iterations = 0;
  double residual = 0.0;
  double objective = 0.0;  // |v|_1 in constrained mode, penalized objective otherwise
  double lambda = 0.0;
  bool converged = false;
  bool certified = false;  // optimality certificate holds at the final lambda
  std::vector<double> history;
  std::vector<std::string> warnings;
};

struct L1Result {
  Eigen::VectorXd x;
  L1Report report;
};

struct LassoCertificate {
  bool ok = false;
  double zero_set = 0.0;  // max |g_i| / lambda off the support
  double support = 0.0;   // max |g_i + lambda sign(x_i)| / lambda on the support
};

/// First-order optimality of x for the penalized problem, g = A^T (A x - b).
LassoCertificate lasso_certificate(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                                   double lambda, double tol, bool nonnegative = false);

/// Largest eigenvalue of A^T A by power iteration from a fixed start vector.
double power_norm_squared(const Eigen::MatrixXd& A, int iterations);

/// Monotone FISTA on the penalized problem, warm-started from x0 when given.
L1Result solve_lasso(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double lambda, const L1Options& opts,
                     const Eigen::VectorXd* x0 = nullptr, double lipschitz = 0.0);

/// Dispatches on opts.epsilon / opts.lambda. In constrained mode lambda is
/// continued down from |A^T b|_inf and then bisected so that the residual
/// matches epsilon.
L1Result l1_minimize(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const L1Options& opts);

/// [Re A; Im A] and [Re b; Im b] for real unknowns.
Eigen::MatrixXd stack_real(const MatrixXc& A);
Eigen::VectorXd stack_real(const VectorXc& b);

}  // namespace wgi
