#include "wgi/l1_solver.hpp"

#include <cmath>
#include <sstream>

namespace wgi {

using Eigen::MatrixXd;
using Eigen::VectorXd;

LassoCertificate lasso_certificate(const MatrixXd& A, const VectorXd& b, const VectorXd& x, double lambda, double tol,
                                   bool nonnegative) {
  const VectorXd g = A.transpose() * (A * x - b);
  LassoCertificate c;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      const double sgn = x[i] > 0 ? 1.0 : -1.0;
      c.support = std::max(c.support, std::abs(g[i] + lambda * sgn) / lambda);
    } else {
      // nonnegative: only g_i >= -lambda is required off the support
      const double viol = nonnegative ? std::max(0.0, -g[i]) : std::abs(g[i]);
      c.zero_set = std::max(c.zero_set, viol / lambda);
    }
  }
  c.ok = c.support <= tol && c.zero_set <= 1.0 + tol;
  return c;
}

double power_norm_squared(const MatrixXd& A, int iterations) {
  if (A.cols() == 0) return 0.0;
  VectorXd v = VectorXd::Ones(A.cols()) / std::sqrt(static_cast<double>(A.cols()));
  double est = 0.0;
  for (int i = 0; i < iterations; ++i) {
    const VectorXd w = A.transpose() * (A * v);
    est = w.norm();
    if (est == 0.0) return 0.0;
    v = w / est;
  }
  return est;
}

namespace {

double penalized(const VectorXd& Ax, const VectorXd& b, const VectorXd& x, double lambda) {
  return 0.5 * (Ax - b).squaredNorm() + lambda * x.lpNorm<1>();
}

/// Exact minimizer on the current sign pattern, if it certifies.
bool polish(const MatrixXd& A, const VectorXd& b, double lambda, const L1Options& o, const VectorXd& x,
            VectorXd& out) {
  const double xmax = x.cwiseAbs().maxCoeff();
  for (double rel : {0.0, 1e-6, 1e-3}) {
    std::vector<Eigen::Index> S;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (std::abs(x[i]) > rel * xmax && x[i] != 0.0) S.push_back(i);
    if (S.empty() || static_cast<Eigen::Index>(S.size()) > A.rows()) continue;
    MatrixXd AS(A.rows(), static_cast<Eigen::Index>(S.size()));
    VectorXd sg(static_cast<Eigen::Index>(S.size()));
    for (std::size_t j = 0; j < S.size(); ++j) {
      AS.col(static_cast<Eigen::Index>(j)) = A.col(S[j]);
      sg[static_cast<Eigen::Index>(j)] = x[S[j]] > 0 ? 1.0 : -1.0;
    }
    const MatrixXd M = AS.transpose() * AS;
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) continue;
    const VectorXd vS = llt.solve(AS.transpose() * b - lambda * sg);
    if ((vS.array() * sg.array() <= 0.0).any()) continue;
    VectorXd v = VectorXd::Zero(x.size());
    for (std::size_t j = 0; j < S.size(); ++j) v[S[j]] = vS[static_cast<Eigen::Index>(j)];
    if (lasso_certificate(A, b, v, lambda, o.certificate_tol, o.nonnegative).ok) {
      out = std::move(v);
      return true;
    }
  }
  return false;
}

void finish_report(const MatrixXd& A, const VectorXd& b, double lambda, const L1Options& o, const VectorXd& x,
                   L1Report& r) {
  const VectorXd Ax = A * x;
  r.residual = (Ax - b).norm();
  r.objective = penalized(Ax, b, x, lambda);
  r.lambda = lambda;
  r.certified = lasso_certificate(A, b, x, lambda, o.certificate_tol, o.nonnegative).ok;
  r.converged = r.converged || r.certified;
}

}  // namespace

L1Result solve_lasso(const MatrixXd& A, const VectorXd& b, double lambda, const L1Options& o, const VectorXd* x0,
                     double lipschitz) {
  if (!(lambda > 0.0)) throw InputError("lasso: lambda must be positive");
  if (A.rows() != b.size()) throw InputError("lasso: dimension mismatch between A and b");
  L1Result res;
  VectorXd x = x0 ? *x0 : VectorXd::Zero(A.cols());
  if (x.size() != A.cols()) throw InputError("lasso: warm start has the wrong length");
  const double L = lipschitz > 0.0 ? lipschitz : power_norm_squared(A, o.power_iterations);
  if (L == 0.0) {
    res.x = VectorXd::Zero(A.cols());
    finish_report(A, b, lambda, o, res.x, res.report);
    return res;
  }
  const double step = o.step_safety / L;

  VectorXd polished;
  if (o.polish && x.cwiseAbs().maxCoeff() > 0.0 && polish(A, b, lambda, o, x, polished)) {
    res.x = std::move(polished);
    finish_report(A, b, lambda, o, res.x, res.report);
    return res;
  }

  VectorXd Ax = A * x;
  double Fx = penalized(Ax, b, x, lambda);
  VectorXd y = x, Ay = Ax;
  double t = 1.0;
  if (o.record_history) res.report.history.push_back(Fx);
  int it = 0;
  bool done = false;
  for (it = 1; it <= o.max_iter; ++it) {
    const VectorXd g = A.transpose() * (Ay - b);
    const VectorXd z = soft_threshold((y - step * g).array(), step * lambda, o.nonnegative).matrix();
    const VectorXd Az = A * z;
    const double Fz = penalized(Az, b, z, lambda);
    const VectorXd x_prev = x, Ax_prev = Ax;
    const double F_prev = Fx;
    const bool accepted = Fz <= Fx;
    if (accepted) {
      x = z;
      Ax = Az;
      Fx = Fz;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (accepted) {
      const double c1 = t / t_next, c2 = (t - 1.0) / t_next;
      y = x + c1 * (z - x) + c2 * (x - x_prev);
      Ay = Ax + c1 * (Az - Ax) + c2 * (Ax - Ax_prev);
      t = t_next;
    } else {
      // momentum restart keeps the sequence monotone without stalling
      y = x;
      Ay = Ax;
      t = 1.0;
    }
    if (o.record_history) res.report.history.push_back(Fx);
    if (accepted && F_prev - Fx <= o.tol * std::max(Fx, 1e-300)) {
      res.report.converged = true;
      done = true;
    }
    if (!done && o.polish && it % o.polish_every == 0 && polish(A, b, lambda, o, x, polished)) {
      x = std::move(polished);
      done = true;
    }
    if (done) break;
  }
  res.report.iterations = std::min(it, o.max_iter);
  if (o.polish && polish(A, b, lambda, o, x, polished)) x = std::move(polished);
  res.x = std::move(x);
  finish_report(A, b, lambda, o, res.x, res.report);
  return res;
}

namespace {

L1Result constrained(const MatrixXd& A, const VectorXd& b, double eps, const L1Options& o) {
  L1Result best;
  best.x = VectorXd::Zero(A.cols());
  const double bn = b.norm();
  auto finish = [&](L1Result& r) {
    r.report.residual = (A * r.x - b).norm();
    r.report.objective = r.x.lpNorm<1>();
    return r;
  };
  if (bn <= eps) {
    best.report.converged = true;
    best.report.certified = true;
    return finish(best);
  }
  const VectorXd atb = A.transpose() * b;
  const double lam_max = o.nonnegative ? std::max(0.0, atb.maxCoeff()) : atb.cwiseAbs().maxCoeff();
  if (lam_max == 0.0) {
    best.report.warnings.push_back("A^T b vanishes; the zero vector is the only l1-minimal candidate");
    return finish(best);
  }
  const double L = power_norm_squared(A, o.power_iterations);
  const double lam_floor = lam_max * o.lambda_min_ratio;
  int total_iter = 0;
  std::vector<double> history;
  auto run = [&](double lam, const VectorXd& warm) {
    L1Result r = solve_lasso(A, b, lam, o, &warm, L);
    total_iter += r.report.iterations;
    if (o.record_history) history.insert(history.end(), r.report.history.begin(), r.report.history.end());
    return r;
  };

  // continuation: shrink lambda until the residual drops below eps
  double lam_hi = lam_max;
  VectorXd x_hi = VectorXd::Zero(A.cols());
  double lam = lam_max * o.continuation_factor;
  std::optional<L1Result> lo;
  double lam_lo = 0.0;
  while (true) {
    L1Result r = run(lam, x_hi);
    if (r.report.residual <= eps) {
      lo = std::move(r);
      lam_lo = lam;
      break;
    }
    lam_hi = lam;
    x_hi = r.x;
    if (lam * o.continuation_factor < lam_floor) {
      std::ostringstream msg;
      msg << "lambda reached its floor " << lam << " with residual " << r.report.residual << " > epsilon " << eps;
      r.report.warnings.push_back(msg.str());
      r.report.converged = false;
      r.report.iterations = total_iter;
      r.report.history = std::move(history);
      r.report.residual = (A * r.x - b).norm();
      r.report.objective = r.x.lpNorm<1>();
      return r;
    }
    lam *= o.continuation_factor;
  }

  // bisection in log lambda between an infeasible and a feasible lambda
  for (int k = 0; k < 60; ++k) {
    if (lo->report.residual >= (1.0 - o.epsilon_rel_tol) * eps) break;
    if (lam_hi / lam_lo < 1.0 + 1e-9) break;
    const double mid = std::sqrt(lam_hi * lam_lo);
    L1Result r = run(mid, lo->x);
    if (r.report.residual <= eps) {
      lo = std::move(r);
      lam_lo = mid;
    } else {
      lam_hi = mid;
    }
  }
  L1Result out = std::move(*lo);
  out.report.iterations = total_iter;
  out.report.history = std::move(history);
  return finish(out);
}

}  // namespace

L1Result l1_minimize(const MatrixXd& A, const VectorXd& b, const L1Options& opts) {
  if (A.rows() != b.size()) throw InputError("l1: dimension mismatch between A and b");
  if (opts.epsilon) {
    if (*opts.epsilon < 0.0) throw InputError("l1: epsilon must be nonnegative");
    return constrained(A, b, *opts.epsilon, opts);
  }
  if (opts.lambda) return solve_lasso(A, b, *opts.lambda, opts);
  throw InputError("l1: give either epsilon or lambda");
}

MatrixXd stack_real(const MatrixXc& A) {
  MatrixXd out(2 * A.rows(), A.cols());
  out.topRows(A.rows()) = A.real();
  out.bottomRows(A.rows()) = A.imag();
  return out;
}

VectorXd stack_real(const VectorXc& b) {
  VectorXd out(2 * b.size());
  out.head(b.size()) = b.real();
  out.tail(b.size()) = b.imag();
  return out;
}

}  // namespace wgi
