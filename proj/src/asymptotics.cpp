#include "mhtest/asymptotics.hpp"

#include <cmath>
#include <sstream>

#include "mhtest/errors.hpp"
#include "mhtest/normal.hpp"

namespace mhtest {

namespace {

Vector stacked_marginal_theta(const NaturalCoords& c) {
  Vector out(c.theta_x.size() + c.theta_y.size());
  out << c.theta_x, c.theta_y;
  return out;
}

}  // namespace

std::vector<ExponentPoint> optimal_exponent_curve(LambdaPath& path,
                                                  const std::vector<double>& lambdas) {
  std::vector<ExponentPoint> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    LambdaSolution s = [&] {
      try {
        return path.solve(lambda);
      } catch (const ConvergenceError& e) {
        std::ostringstream os;
        os << "exponent curve at lambda = " << lambda << ": " << e.what();
        throw ConvergenceError(os.str(), e.residual());
      }
    }();
    out.push_back({s.type1_exponent, s.type2_exponent, lambda, lambda});
  }
  return out;
}

std::vector<ExponentPoint> optimal_exponent_curve(const JointDistribution& p,
                                                  const JointDistribution& q,
                                                  const std::vector<double>& lambdas,
                                                  const SolverOptions& opts) {
  LambdaPath path(p, q, opts);
  return optimal_exponent_curve(path, lambdas);
}

std::pair<double, double> fixed_lambda_tau_range(const LambdaPath& path, Endpoint which) {
  const LambdaSolution s = path.endpoint(which);
  if (which == Endpoint::upper) {
    return {expectation(path.q().table(), s.llr.table), path.e_pq()};
  }
  return {-path.e_qp(), expectation(path.p().table(), s.llr.table)};
}

std::vector<ExponentPoint> fixed_lambda_curve(const LambdaPath& path, Endpoint which,
                                              const std::vector<double>& taus) {
  const LambdaSolution s = path.endpoint(which);
  const auto [lo, hi] = fixed_lambda_tau_range(path, which);
  const TiltedFamily p_side(path.p(), s.llr, TiltSide::p_side);
  const TiltedFamily q_side(path.q(), s.llr, TiltSide::q_side);
  constexpr double kSlack = 1e-12;
  std::vector<ExponentPoint> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    if (!(tau >= lo - kSlack && tau <= hi + kSlack)) {
      std::ostringstream os;
      os << "tau = " << tau << " lies outside [" << lo << ", " << hi << "] for the "
         << (which == Endpoint::upper ? "upper" : "lower") << " endpoint";
      throw RangeError(os.str());
    }
    const double t = p_side.inverse(tau);
    const double sq = q_side.inverse(tau);
    out.push_back({p_side.divergence(t), q_side.divergence(sq), s.lambda, tau});
  }
  return out;
}

std::vector<TrajectoryPoint> lambda_trajectory(LambdaPath& path, const std::vector<double>& lambdas) {
  const Vector theta_p = stacked_marginal_theta(to_natural(path.p()));
  const Vector theta_q = stacked_marginal_theta(to_natural(path.q()));
  std::vector<TrajectoryPoint> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const LambdaSolution s = path.solve(lambda);
    TrajectoryPoint pt;
    pt.lambda = lambda;
    pt.p_theta = to_natural(s.p_lambda);
    pt.q_theta = to_natural(s.q_lambda);
    const Vector dp = stacked_marginal_theta(pt.p_theta) - theta_p;
    const Vector dq = stacked_marginal_theta(pt.q_theta) - theta_q;
    pt.parallel_residual = ((1.0 + s.tilt) * dp - s.tilt * dq).cwiseAbs().maxCoeff();
    out.push_back(std::move(pt));
  }
  return out;
}

SecondOrderStats second_order_stats(const JointDistribution& p, const JointDistribution& q,
                                    const ProjectionOptions& opts) {
  if (p.x_size() != q.x_size() || p.y_size() != q.y_size()) {
    throw InvalidArgument("second_order_stats: dimension mismatch");
  }
  const Table star = projected_table(q, p.marginal_x(), p.marginal_y(), opts);
  SecondOrderStats s;
  s.density = star.array().log() - q.table().array().log();
  s.e = expectation(p.table(), s.density);
  const Table dev = (s.density.array() - s.e).matrix();
  s.v = expectation(p.table(), dev.array().square().matrix());
  s.t3 = expectation(p.table(), dev.array().abs().cube().matrix());
  return s;
}

double np_threshold_for_eps(const SecondOrderStats& s, int n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw RangeError("eps must lie in (0, 1)");
  if (n < 1) throw RangeError("n must be positive");
  if (!(s.v > 0.0)) throw RangeError("the density has zero variance; the threshold is undefined");
  const double arg = eps - 6.0 * s.t3 / (std::sqrt(static_cast<double>(n)) * std::pow(s.v, 1.5));
  if (!(arg > 0.0 && arg < 1.0)) {
    std::ostringstream os;
    os << "n = " << n << " is too small for eps = " << eps << ": the normal quantile argument is "
       << arg << " (needs n >= " << min_blocklength_for_eps(s, eps) << ")";
    throw RangeError(os.str());
  }
  return s.e + std::sqrt(s.v / n) * normal_quantile(arg);
}

double np_threshold_for_eps(const JointDistribution& p, const JointDistribution& q, int n,
                            double eps) {
  return np_threshold_for_eps(second_order_stats(p, q), n, eps);
}

int min_blocklength_for_eps(const SecondOrderStats& s, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw RangeError("eps must lie in (0, 1)");
  if (!(s.v > 0.0)) throw RangeError("the density has zero variance");
  const double root = 6.0 * s.t3 / (eps * std::pow(s.v, 1.5));
  int n = std::max(1, static_cast<int>(std::floor(root * root)));
  while (eps - 6.0 * s.t3 / (std::sqrt(static_cast<double>(n)) * std::pow(s.v, 1.5)) <= 0.0) ++n;
  return n;
}

double second_order_beta_approx(const SecondOrderStats& s, int n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw RangeError("eps must lie in (0, 1)");
  if (n < 1) throw RangeError("n must be positive");
  const double nn = static_cast<double>(n);
  return nn * s.e + std::sqrt(nn * s.v) * normal_quantile(eps) + 0.5 * std::log(nn);
}

double second_order_beta_approx(const JointDistribution& p, const JointDistribution& q, int n,
                                double eps) {
  return second_order_beta_approx(second_order_stats(p, q), n, eps);
}

double taylor_residual(const JointDistribution& p, const JointDistribution& q,
                       const JointDistribution& pbar) {
  const SecondOrderStats s = second_order_stats(p, q);
  const double e_bar = projected_divergence_to_marginals(q, pbar.marginal_x(), pbar.marginal_y());
  return std::abs(e_bar - expectation(pbar.table(), s.density));
}

double projected_entropy_at(const ExpectationCoords& eta, const JointDistribution& q) {
  return projected_relative_entropy(from_expectation(eta).table(), q);
}

GradientCheck projected_entropy_gradient(const JointDistribution& p, const JointDistribution& q,
                                         double step) {
  if (!(step > 0.0)) throw InvalidArgument("gradient check: step must be positive");
  const SecondOrderStats s = second_order_stats(p, q);
  const Table& j = s.density;
  const ExpectationCoords base = to_expectation(p);
  const Eigen::Index dx = base.eta_x.size();
  const Eigen::Index dy = base.eta_y.size();
  const Eigen::Index dim = dx + dy + dx * dy;

  GradientCheck g;
  g.numeric.resize(dim);
  g.analytic.resize(dim);
  const auto central = [&](auto&& perturb) {
    ExpectationCoords plus = base, minus = base;
    perturb(plus, step);
    perturb(minus, -step);
    return (projected_entropy_at(plus, q) - projected_entropy_at(minus, q)) / (2.0 * step);
  };
  for (Eigen::Index i = 0; i < dx; ++i) {
    g.numeric[i] = central([&](ExpectationCoords& c, double h) { c.eta_x[i] += h; });
    g.analytic[i] = j(i + 1, 0) - j(0, 0);
  }
  for (Eigen::Index k = 0; k < dy; ++k) {
    g.numeric[dx + k] = central([&](ExpectationCoords& c, double h) { c.eta_y[k] += h; });
    g.analytic[dx + k] = j(0, k + 1) - j(0, 0);
  }
  for (Eigen::Index i = 0; i < dx; ++i) {
    for (Eigen::Index k = 0; k < dy; ++k) {
      const Eigen::Index idx = dx + dy + i * dy + k;
      g.numeric[idx] = central([&](ExpectationCoords& c, double h) { c.eta_xy(i, k) += h; });
      g.analytic[idx] = 0.0;
      g.max_xy_derivative = std::max(g.max_xy_derivative, std::abs(g.numeric[idx]));
    }
  }
  g.max_discrepancy = (g.numeric - g.analytic).cwiseAbs().maxCoeff();
  return g;
}

double projected_entropy_gradient_check(const JointDistribution& p, const JointDistribution& q,
                                        double step) {
  return projected_entropy_gradient(p, q, step).max_discrepancy;
}

}  // namespace mhtest
