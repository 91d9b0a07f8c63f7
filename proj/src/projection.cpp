#include "mhtest/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

constexpr double kMarginalSumTolerance = 1e-9;

void check_marginal(const Vector& m, Eigen::Index size, const char* name, bool strict) {
  if (m.size() != size) {
    std::ostringstream os;
    os << "marginal " << name << " has length " << m.size() << ", expected " << size;
    throw InvalidArgument(os.str());
  }
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double floor = strict ? kMinCellProbability : 0.0;
    if (!(m[i] >= floor) || !(m[i] <= 1.0 + kMarginalSumTolerance)) {
      std::ostringstream os;
      os << "marginal " << name << "[" << i << "] = " << m[i]
         << (strict ? " is not strictly positive" : " is not a probability");
      throw InvalidArgument(os.str());
    }
  }
  if (std::abs(m.sum() - 1.0) > kMarginalSumTolerance) {
    std::ostringstream os;
    os << "marginal " << name << " sums to " << m.sum();
    throw InvalidArgument(os.str());
  }
}

double marginal_mismatch(const Table& r, const Vector& mx, const Vector& my) {
  const double row = 0.5 * (r.rowwise().sum() - mx).cwiseAbs().sum();
  const double col = 0.5 * (r.colwise().sum().transpose() - my).cwiseAbs().sum();
  return std::max(row, col);
}

TableProjection scale_to_marginals(const JointDistribution& q, const Vector& mx, const Vector& my,
                                   const ProjectionOptions& opts) {
  TableProjection out;
  Table r = q.table();
  double residual = marginal_mismatch(r, mx, my);
  int it = 0;
  while (residual >= opts.tol) {
    if (it >= opts.max_iter) {
      std::ostringstream os;
      os << "marginal scaling did not reach tolerance " << opts.tol << " in " << opts.max_iter
         << " iterations (residual " << residual << ")";
      throw ConvergenceError(os.str(), residual);
    }
    const Vector rows = r.rowwise().sum();
    for (Eigen::Index i = 0; i < r.rows(); ++i) r.row(i) *= mx[i] / rows[i];
    const Vector cols = r.colwise().sum().transpose();
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      if (cols[j] > 0.0) r.col(j) *= my[j] / cols[j];
    }
    ++it;
    residual = marginal_mismatch(r, mx, my);
    if (opts.record_trace) out.trace.push_back(residual);
  }
  out.value = kl_divergence(r, q.table());
  out.projection = std::move(r);
  out.iterations = it;
  out.residual = residual;
  return out;
}

bool is_binary(const JointDistribution& q) { return q.x_size() == 2 && q.y_size() == 2; }

}  // namespace

ProjectionResult project_onto_marginals(const JointDistribution& q, const Vector& mx,
                                        const Vector& my, const ProjectionOptions& opts) {
  check_marginal(mx, q.x_size(), "x", true);
  check_marginal(my, q.y_size(), "y", true);
  TableProjection t = scale_to_marginals(q, mx, my, opts);
  // Rounding can leave the total a few ulps off 1.
  return ProjectionResult{JointDistribution::normalized(std::move(t.projection)), t.value,
                          t.iterations, t.residual, std::move(t.trace)};
}

TableProjection project_table_onto_marginals(const JointDistribution& q, const Vector& mx,
                                             const Vector& my, const ProjectionOptions& opts) {
  check_marginal(mx, q.x_size(), "x", false);
  check_marginal(my, q.y_size(), "y", false);
  return scale_to_marginals(q, mx, my, opts);
}

Table projected_table(const JointDistribution& q, const Vector& mx, const Vector& my,
                      const ProjectionOptions& opts) {
  if (is_binary(q)) {
    check_marginal(mx, 2, "x", false);
    check_marginal(my, 2, "y", false);
    return binary_projection_table(q, mx, my);
  }
  return project_table_onto_marginals(q, mx, my, opts).projection;
}

double projected_divergence_to_marginals(const JointDistribution& q, const Vector& mx,
                                         const Vector& my, const ProjectionOptions& opts) {
  return kl_divergence(projected_table(q, mx, my, opts), q.table());
}

double projected_relative_entropy(const JointDistribution& p, const JointDistribution& q,
                                  const ProjectionOptions& opts) {
  if (p.x_size() != q.x_size() || p.y_size() != q.y_size()) {
    throw InvalidArgument("projected_relative_entropy: dimension mismatch");
  }
  return project_onto_marginals(q, p.marginal_x(), p.marginal_y(), opts).value;
}

double projected_relative_entropy(const Table& p, const JointDistribution& q,
                                  const ProjectionOptions& opts) {
  if (p.rows() != q.x_size() || p.cols() != q.y_size()) {
    throw InvalidArgument("projected_relative_entropy: dimension mismatch");
  }
  const Vector mx = p.rowwise().sum();
  const Vector my = p.colwise().sum().transpose();
  return projected_divergence_to_marginals(q, mx, my, opts);
}

double binary_eta_xy(double eta_x, double eta_y, double theta_xy) {
  if (!(eta_x >= 0.0 && eta_x <= 1.0 && eta_y >= 0.0 && eta_y <= 1.0)) {
    throw InvalidArgument("binary_eta_xy: marginal masses must lie in [0, 1]");
  }
  if (!std::isfinite(theta_xy)) throw InvalidArgument("binary_eta_xy: theta_xy must be finite");
  const double lo = std::max(0.0, eta_x + eta_y - 1.0);
  const double hi = std::min(eta_x, eta_y);
  if (hi <= lo) return lo;

  double eta;
  if (std::abs(theta_xy) < 1e-9) {
    eta = eta_x * eta_y + theta_xy * eta_x * (1.0 - eta_x) * eta_y * (1.0 - eta_y);
  } else {
    // k eta^2 - B eta + (k+1) eta_x eta_y = 0 with k = e^theta - 1; the root
    // inside the Frechet interval, written to avoid cancellation.
    const double k = std::expm1(theta_xy);
    const double odds = std::exp(theta_xy);  // k + 1 without cancellation
    const double b = (eta_x + eta_y) * k + 1.0;
    const double disc = std::max(0.0, b * b - 4.0 * k * odds * eta_x * eta_y);
    const double root = std::sqrt(disc);
    if (b >= 0.0) {
      // b + root vanishes only when the odds ratio underflows against the
      // marginals; the limit is the lower Frechet bound.
      const double denom = b + root;
      eta = denom > 0.0 ? 2.0 * odds * eta_x * eta_y / denom : lo;
    } else {
      eta = (b - root) / (2.0 * k);
    }
  }
  return std::clamp(eta, lo, hi);
}

Table binary_projection_table(const JointDistribution& q, const Vector& mx, const Vector& my) {
  if (!is_binary(q) || mx.size() != 2 || my.size() != 2) {
    throw InvalidArgument("binary_projection_table needs a 2x2 distribution");
  }
  const double theta = std::log(q(1, 1)) + std::log(q(0, 0)) - std::log(q(1, 0)) - std::log(q(0, 1));
  const double ex = mx[1];
  const double ey = my[1];
  const double e11 = binary_eta_xy(ex, ey, theta);
  Table r(2, 2);
  r(1, 1) = e11;
  r(1, 0) = std::max(0.0, ex - e11);
  r(0, 1) = std::max(0.0, ey - e11);
  r(0, 0) = std::max(0.0, mx[0] - r(0, 1));
  return r;
}

double pythagorean_residual(const JointDistribution& p, const JointDistribution& q,
                            const ProjectionOptions& opts) {
  const ProjectionResult star = project_onto_marginals(q, p.marginal_x(), p.marginal_y(), opts);
  return std::abs(kl_divergence(p, q) - kl_divergence(p, star.projection) -
                  kl_divergence(star.projection, q));
}

double projected_relative_entropy_over_types(const JointType& t, const JointDistribution& q,
                                             std::uint64_t max_types) {
  if (t.x_size() != q.x_size() || t.y_size() != q.y_size()) {
    throw InvalidArgument("projected_relative_entropy_over_types: dimension mismatch");
  }
  const std::vector<int> xc = t.x_counts();
  const std::vector<int> yc = t.y_counts();
  const Table log_q = q.table().array().log();
  const double n = t.n();
  const int ys = t.y_size();
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;
  for_each_joint_type_with_marginals(xc, yc, [&](std::span<const int> c) {
    if (++visited > max_types) {
      std::ostringstream os;
      os << "more than " << max_types << " joint types share the requested marginals";
      throw ResourceCapExceeded(os.str());
    }
    double d = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] == 0) continue;
      const double f = c[i] / n;
      d += f * (std::log(f) - log_q(static_cast<Eigen::Index>(i) / ys,
                                   static_cast<Eigen::Index>(i) % ys));
    }
    best = std::min(best, d);
  });
  return std::max(0.0, best);
}

double type_restriction_gap(int n, const JointDistribution& q) {
  if (n < 1) throw InvalidArgument("type_restriction_gap: n must be positive");
  const double cells = static_cast<double>(q.x_size()) * q.y_size();
  const double nu = 4.0 * (q.x_size() - 1) * (q.y_size() - 1) / n;
  if (nu == 0.0) return 0.0;
  const double max_log_inv = -std::log(q.table().minCoeff());
  return nu * std::log(cells / nu) + nu * max_log_inv;
}

}  // namespace mhtest
