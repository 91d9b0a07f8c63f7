#include "mhtest/distribution.hpp"

#include <cmath>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

void validate(const Table& p) {
  if (p.rows() < 1 || p.cols() < 1) {
    throw InvalidArgument("joint distribution needs at least one row and one column");
  }
  double total = 0.0;
  for (Eigen::Index x = 0; x < p.rows(); ++x) {
    for (Eigen::Index y = 0; y < p.cols(); ++y) {
      const double v = p(x, y);
      if (!std::isfinite(v) || v < kMinCellProbability) {
        std::ostringstream os;
        os << "cell (" << x << ", " << y << ") = " << v
           << " violates full support (minimum " << kMinCellProbability << ")";
        throw InvalidArgument(os.str());
      }
      total += v;
    }
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "probabilities sum to " << total << ", expected 1";
    throw InvalidArgument(os.str());
  }
}

}  // namespace

JointDistribution::JointDistribution(Table p) : p_(std::move(p)) { validate(p_); }

JointDistribution JointDistribution::normalized(Table p) {
  const double total = p.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InvalidArgument("cannot normalize a table with non-positive total mass");
  }
  p /= total;
  return JointDistribution(std::move(p));
}

JointDistribution JointDistribution::uniform(int x_size, int y_size) {
  if (x_size < 1 || y_size < 1) throw InvalidArgument("alphabet sizes must be positive");
  return JointDistribution(Table::Constant(x_size, y_size, 1.0 / (x_size * y_size)));
}

JointDistribution JointDistribution::product(const Vector& px, const Vector& py) {
  return normalized(px * py.transpose());
}

std::pair<Vector, Vector> marginals(const JointDistribution& d) {
  return {d.marginal_x(), d.marginal_y()};
}

double kl_divergence(const Table& p, const Table& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw InvalidArgument("kl_divergence: dimension mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index x = 0; x < p.rows(); ++x) {
    for (Eigen::Index y = 0; y < p.cols(); ++y) {
      const double a = p(x, y);
      if (a <= 0.0) continue;
      const double b = q(x, y);
      if (b <= 0.0) {
        throw InvalidArgument("kl_divergence: q vanishes where p is positive");
      }
      sum += a * std::log(a / b);
    }
  }
  // Rounding can leave a tiny negative value when p == q.
  return sum < 0.0 ? 0.0 : sum;
}

double kl_divergence(const JointDistribution& p, const JointDistribution& q) {
  return kl_divergence(p.table(), q.table());
}

double expectation(const Table& p, const Table& f) {
  if (p.rows() != f.rows() || p.cols() != f.cols()) {
    throw InvalidArgument("expectation: dimension mismatch");
  }
  return (p.array() * f.array()).sum();
}

bool is_probability_vector(const Vector& v, double tol) {
  if (v.size() == 0) return false;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < 0.0) return false;
  }
  return std::abs(v.sum() - 1.0) <= tol;
}

}  // namespace mhtest
