#include "mhtest/lambda_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/LU>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

constexpr double kMinSharedMarginal = 1e-15;
constexpr double kEndpointSnap = 1e-14;

Vector tail(const Vector& v) { return v.tail(v.size() - 1); }

// Natural x and y coordinates of a positive table, stacked.
Vector marginal_thetas(const Table& t) {
  const Eigen::Index dx = t.rows() - 1;
  const Eigen::Index dy = t.cols() - 1;
  Vector out(dx + dy);
  const double l00 = std::log(t(0, 0));
  for (Eigen::Index i = 1; i <= dx; ++i) out[i - 1] = std::log(t(i, 0)) - l00;
  for (Eigen::Index j = 1; j <= dy; ++j) out[dx + j - 1] = std::log(t(0, j)) - l00;
  return out;
}

double max_norm(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

std::pair<Vector, Vector> additive_decomposition(const Table& table, int ref_x, int ref_y) {
  if (ref_x < 0 || ref_x >= table.rows() || ref_y < 0 || ref_y >= table.cols()) {
    throw InvalidArgument("additive_decomposition: reference cell outside the table");
  }
  Vector a1 = table.col(ref_y);
  Vector a2 = table.row(ref_x).transpose().array() - table(ref_x, ref_y);
  const double res = additive_residual(table, a1, a2);
  if (!(res <= 1e-6)) {
    std::ostringstream os;
    os << "table is not additively separable (reconstruction residual " << res << ")";
    throw InvalidArgument(os.str());
  }
  return {std::move(a1), std::move(a2)};
}

double additive_residual(const Table& table, const Vector& a1, const Vector& a2) {
  if (a1.size() != table.rows() || a2.size() != table.cols()) {
    throw InvalidArgument("additive_residual: dimension mismatch");
  }
  double worst = 0.0;
  for (Eigen::Index x = 0; x < table.rows(); ++x) {
    for (Eigen::Index y = 0; y < table.cols(); ++y) {
      worst = std::max(worst, std::abs(table(x, y) - a1[x] - a2[y]));
    }
  }
  return worst;
}

ProxyLLR ProxyLLR::from_table(const Table& table) {
  auto [a1, a2] = additive_decomposition(table);
  return from_parts(std::move(a1), std::move(a2));
}

ProxyLLR ProxyLLR::from_parts(Vector a1, Vector a2) {
  ProxyLLR out;
  out.table = a1.replicate(1, a2.size()) + a2.transpose().replicate(a1.size(), 1);
  out.a1 = std::move(a1);
  out.a2 = std::move(a2);
  return out;
}

double ProxyLLR::statistic(const Vector& tx, const Vector& ty) const {
  if (tx.size() != a1.size() || ty.size() != a2.size()) {
    throw InvalidArgument("proxy statistic: type dimensions do not match the table");
  }
  return tx.dot(a1) + ty.dot(a2);
}

LambdaPath::LambdaPath(JointDistribution p, JointDistribution q, SolverOptions opts)
    : p_(std::move(p)), q_(std::move(q)), opts_(opts) {
  if (p_.x_size() != q_.x_size() || p_.y_size() != q_.y_size()) {
    throw InvalidArgument("P and Q must share the alphabet");
  }
  if (p_.x_size() < 2 || p_.y_size() < 2) {
    throw InvalidArgument("both alphabets need at least two symbols");
  }
  log_p_ = p_.table().array().log();
  log_q_ = q_.table().array().log();
  theta_p_ = marginal_thetas(p_.table());
  theta_q_ = marginal_thetas(q_.table());
  p_star_ = project(q_, p_.marginal_x(), p_.marginal_y());
  q_star_ = project(p_, q_.marginal_x(), q_.marginal_y());
  e_pq_ = kl_divergence(p_star_, q_.table());
  e_qp_ = kl_divergence(q_star_, p_.table());

  const Eigen::Index dim = p_.x_size() + p_.y_size() - 1;
  Vector upper(dim), lower(dim);
  upper << tail(p_.marginal_x()), tail(p_.marginal_y()), 0.0;
  lower << tail(q_.marginal_x()), tail(q_.marginal_y()), -1.0;
  cache_[e_pq_] = upper;
  cache_[-e_qp_] = lower;
}

Table LambdaPath::project(const JointDistribution& base, const Vector& mx, const Vector& my) const {
  if (base.x_size() == 2 && base.y_size() == 2) return binary_projection_table(base, mx, my);
  return project_table_onto_marginals(base, mx, my, opts_.projection).projection;
}

bool LambdaPath::feasible(const Vector& z) const {
  const Eigen::Index dx = p_.x_size() - 1;
  const Eigen::Index dy = p_.y_size() - 1;
  if (!z.allFinite()) return false;
  const auto ok = [](const Vector& part) {
    return (part.array() > kMinSharedMarginal).all() && 1.0 - part.sum() > kMinSharedMarginal;
  };
  return ok(z.head(dx)) && ok(z.segment(dx, dy));
}

LambdaPath::Eval LambdaPath::evaluate(const Vector& z, double lambda) const {
  const Eigen::Index dx = p_.x_size() - 1;
  const Eigen::Index dy = p_.y_size() - 1;
  Vector mx(dx + 1), my(dy + 1);
  mx << 1.0 - z.head(dx).sum(), z.head(dx);
  my << 1.0 - z.segment(dx, dy).sum(), z.segment(dx, dy);
  const double t = z[dx + dy];

  Eval e;
  e.p_hat = project(p_, mx, my);
  e.q_hat = project(q_, mx, my);
  // Parallel displacement of the marginal coordinates, scaled by (1+t) so
  // that both endpoints stay regular.
  const Vector dp = marginal_thetas(e.p_hat) - theta_p_;
  const Vector dq = marginal_thetas(e.q_hat) - theta_q_;
  e.residual.resize(dx + dy + 1);
  e.residual.head(dx + dy) = (1.0 + t) * dp - t * dq;
  e.residual[dx + dy] = kl_divergence(e.q_hat, q_.table()) - kl_divergence(e.p_hat, p_.table()) - lambda;
  return e;
}

Vector LambdaPath::system_residual(const Vector& z, double lambda) const {
  if (z.size() != p_.x_size() + p_.y_size() - 1) {
    throw InvalidArgument("system_residual: wrong number of unknowns");
  }
  if (!feasible(z)) throw InvalidArgument("system_residual: marginals outside the simplex");
  return evaluate(z, lambda).residual;
}

double LambdaPath::newton(Vector& z, double lambda, int& iterations) const {
  const Eigen::Index dim = z.size();
  Vector f = evaluate(z, lambda).residual;
  double norm = f.norm();
  for (int it = 0; it < opts_.max_iter; ++it) {
    if (max_norm(f) < opts_.tol) break;
    Eigen::MatrixXd jac(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      Vector zh = z;
      double h = opts_.fd_step * std::max(1.0, std::abs(z[k]));
      zh[k] += h;
      if (!feasible(zh)) {
        h = -h;
        zh[k] = z[k] + h;
      }
      jac.col(k) = (evaluate(zh, lambda).residual - f) / h;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (!lu.isInvertible()) break;
    const Vector step = lu.solve(-f);
    if (!step.allFinite()) break;

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts_.max_halvings; ++h, scale *= 0.5) {
      const Vector trial = z + scale * step;
      if (!feasible(trial)) continue;
      const Vector ft = evaluate(trial, lambda).residual;
      if (ft.norm() < norm) {
        z = trial;
        f = ft;
        norm = ft.norm();
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) break;
  }
  return max_norm(f);
}

Vector LambdaPath::continue_from(double start_lambda, Vector z, double target,
                                 int& iterations) const {
  double current = start_lambda;
  double step = opts_.continuation_step;
  constexpr double kMinStep = 1e-6;
  while (current != target) {
    const double dist = target - current;
    const double next = std::abs(dist) <= step ? target : current + std::copysign(step, dist);
    Vector trial = z;
    const double res = newton(trial, next, iterations);
    const bool ok = next == target ? res < opts_.accept_tol : res < 1e-8;
    if (ok) {
      z = std::move(trial);
      current = next;
      step = std::min(opts_.continuation_step, step * 2.0);
    } else {
      step *= 0.5;
      if (step < kMinStep) {
        std::ostringstream os;
        os << "continuation toward lambda = " << target << " stalled at lambda = " << current
           << " (residual " << res << ")";
        throw ConvergenceError(os.str(), res);
      }
    }
  }
  return z;
}

LambdaSolution LambdaPath::build(const Vector& z, double lambda, int iterations) const {
  const Eval e = evaluate(z, lambda);
  const Eigen::Index dim = z.size();
  const double t = z[dim - 1];
  const Table log_ph = e.p_hat.array().log();
  const Table log_qh = e.q_hat.array().log();
  const Table dlp = log_ph - log_p_;
  const Table dlq = log_qh - log_q_;
  const double a = t / (1.0 + t);
  const double b = (dlp - a * dlq).mean();

  LambdaSolution s{lambda,
                   JointDistribution::normalized(e.p_hat),
                   JointDistribution::normalized(e.q_hat),
                   a,
                   b,
                   t,
                   kl_divergence(e.p_hat, p_.table()),
                   kl_divergence(e.q_hat, q_.table()),
                   max_norm(e.residual),
                   iterations,
                   ProxyLLR::from_table(dlq - dlp)};
  return s;
}

LambdaSolution LambdaPath::endpoint(Endpoint which) const {
  if (which == Endpoint::upper) {
    const Table llr = p_star_.array().log().matrix() - log_q_;
    return LambdaSolution{e_pq_, p_, JointDistribution::normalized(p_star_), 0.0, 0.0, 0.0, 0.0,
                          e_pq_, 0.0, 0, ProxyLLR::from_table(llr)};
  }
  const Table llr = log_p_ - q_star_.array().log().matrix();
  return LambdaSolution{-e_qp_,
                        JointDistribution::normalized(q_star_),
                        q_,
                        -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::quiet_NaN(),
                        -1.0,
                        e_qp_,
                        0.0,
                        0.0,
                        0,
                        ProxyLLR::from_table(llr)};
}

LambdaSolution LambdaPath::solve(double lambda) {
  if (!std::isfinite(lambda) || lambda > e_pq_ + kEndpointSnap || lambda < -e_qp_ - kEndpointSnap) {
    std::ostringstream os;
    os << "lambda = " << lambda << " lies outside [" << -e_qp_ << ", " << e_pq_ << "]";
    throw RangeError(os.str());
  }
  if (lambda >= e_pq_ - kEndpointSnap) return endpoint(Endpoint::upper);
  if (lambda <= -e_qp_ + kEndpointSnap) return endpoint(Endpoint::lower);

  int iterations = 0;
  const auto hit = cache_.find(lambda);
  if (hit != cache_.end()) {
    Vector z = hit->second;
    newton(z, lambda, iterations);
    return build(z, lambda, iterations);
  }

  // Nearest cached neighbour on each side.
  auto above = cache_.upper_bound(lambda);
  auto below = std::prev(above);
  std::vector<std::pair<double, Vector>> starts;
  if (above->first - lambda <= lambda - below->first) {
    starts = {{above->first, above->second}, {below->first, below->second}};
  } else {
    starts = {{below->first, below->second}, {above->first, above->second}};
  }
  // The upper endpoint is the documented default start; when the nearest
  // start fails, the lower side is tried and the better result is kept.
  double best_res = std::numeric_limits<double>::infinity();
  Vector best;
  std::string last_error;
  for (const auto& [from, z0] : starts) {
    try {
      Vector z = continue_from(from, z0, lambda, iterations);
      const double res = max_norm(evaluate(z, lambda).residual);
      if (res < best_res) {
        best_res = res;
        best = z;
      }
      if (res < opts_.tol) break;
    } catch (const ConvergenceError& e) {
      last_error = e.what();
    }
  }
  if (!(best_res < opts_.accept_tol)) {
    throw ConvergenceError("no solution found for lambda = " + std::to_string(lambda) +
                               (last_error.empty() ? "" : ": " + last_error),
                           best_res);
  }

  LambdaSolution s = build(best, lambda, iterations);
  const double ep = expectation(p_.table(), s.llr.table);
  const double eq = expectation(q_.table(), s.llr.table);
  if (!(eq < lambda && lambda < ep)) {
    std::ostringstream os;
    os << "solution at lambda = " << lambda << " violates E_Q[stat] < lambda < E_P[stat] ("
       << eq << ", " << ep << ")";
    throw ConvergenceError(os.str(), s.residual);
  }
  cache_[lambda] = best;
  return s;
}

double LambdaPath::exponent_F(double r) {
  constexpr double kRangeSlack = 1e-12;
  if (!(r >= -kRangeSlack && r <= e_qp_ + kRangeSlack)) {
    std::ostringstream os;
    os << "r = " << r << " lies outside [0, " << e_qp_ << "]";
    throw RangeError(os.str());
  }
  if (r <= 0.0) return e_pq_;
  if (r >= e_qp_) return 0.0;
  // D(P^lambda || P) decreases from e_qp at the lower end to 0 at the upper end.
  double lo = -e_qp_;
  double hi = e_pq_;
  LambdaSolution at = endpoint(Endpoint::upper);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    at = solve(mid);
    if (at.type1_exponent > r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  at = solve(0.5 * (lo + hi));
  return at.type2_exponent;
}

LambdaSolution solve_lambda_pair(const JointDistribution& p, const JointDistribution& q,
                                 double lambda, const SolverOptions& opts) {
  LambdaPath path(p, q, opts);
  if (!(lambda > -path.e_qp() && lambda < path.e_pq())) {
    std::ostringstream os;
    os << "lambda = " << lambda << " must lie strictly inside (" << -path.e_qp() << ", "
       << path.e_pq() << ")";
    throw RangeError(os.str());
  }
  return path.solve(lambda);
}

LambdaSolution endpoint_solution(const JointDistribution& p, const JointDistribution& q,
                                 Endpoint which, const SolverOptions& opts) {
  return LambdaPath(p, q, opts).endpoint(which);
}

double exponent_F(const JointDistribution& p, const JointDistribution& q, double r,
                  const SolverOptions& opts) {
  LambdaPath path(p, q, opts);
  return path.exponent_F(r);
}

double lambda_of_r(const JointDistribution& p, const JointDistribution& q, double r,
                   const SolverOptions& opts) {
  LambdaPath path(p, q, opts);
  return path.lambda_of_r(r);
}

}  // namespace mhtest
