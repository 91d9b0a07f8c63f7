#include "mhtest/coordinates.hpp"

#include <cmath>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

// Unnormalized log-mass of every cell under the natural parametrization.
Table log_weights(const NaturalCoords& c) {
  const Eigen::Index dx = c.theta_x.size();
  const Eigen::Index dy = c.theta_y.size();
  if (c.theta_xy.rows() != dx || c.theta_xy.cols() != dy) {
    throw InvalidArgument("natural coordinates: theta_xy has the wrong shape");
  }
  Table w = Table::Zero(dx + 1, dy + 1);
  for (Eigen::Index i = 1; i <= dx; ++i) w(i, 0) = c.theta_x[i - 1];
  for (Eigen::Index j = 1; j <= dy; ++j) w(0, j) = c.theta_y[j - 1];
  for (Eigen::Index i = 1; i <= dx; ++i) {
    for (Eigen::Index j = 1; j <= dy; ++j) {
      w(i, j) = c.theta_x[i - 1] + c.theta_y[j - 1] + c.theta_xy(i - 1, j - 1);
    }
  }
  return w;
}

}  // namespace

NaturalCoords to_natural(const JointDistribution& d) {
  const int dx = d.x_size() - 1;
  const int dy = d.y_size() - 1;
  NaturalCoords c{Vector(dx), Vector(dy), Table(dx, dy)};
  const double l00 = std::log(d(0, 0));
  for (int i = 1; i <= dx; ++i) c.theta_x[i - 1] = std::log(d(i, 0)) - l00;
  for (int j = 1; j <= dy; ++j) c.theta_y[j - 1] = std::log(d(0, j)) - l00;
  for (int i = 1; i <= dx; ++i) {
    for (int j = 1; j <= dy; ++j) {
      c.theta_xy(i - 1, j - 1) = std::log(d(i, j)) + l00 - std::log(d(i, 0)) - std::log(d(0, j));
    }
  }
  return c;
}

double potential(const NaturalCoords& c) {
  const Table w = log_weights(c);
  const double m = w.maxCoeff();
  return m + std::log((w.array() - m).exp().sum());
}

JointDistribution from_natural(const NaturalCoords& c) {
  const Table w = log_weights(c);
  const double psi = potential(c);
  return JointDistribution::normalized((w.array() - psi).exp().matrix());
}

ExpectationCoords to_expectation(const JointDistribution& d) {
  const int dx = d.x_size() - 1;
  const int dy = d.y_size() - 1;
  const Vector mx = d.marginal_x();
  const Vector my = d.marginal_y();
  ExpectationCoords c{mx.tail(dx), my.tail(dy), d.table().bottomRightCorner(dx, dy)};
  return c;
}

JointDistribution from_expectation(const ExpectationCoords& c) {
  const Eigen::Index dx = c.eta_x.size();
  const Eigen::Index dy = c.eta_y.size();
  if (c.eta_xy.rows() != dx || c.eta_xy.cols() != dy) {
    throw InvalidArgument("expectation coordinates: eta_xy has the wrong shape");
  }
  Table p(dx + 1, dy + 1);
  p.bottomRightCorner(dx, dy) = c.eta_xy;
  for (Eigen::Index i = 1; i <= dx; ++i) p(i, 0) = c.eta_x[i - 1] - c.eta_xy.row(i - 1).sum();
  for (Eigen::Index j = 1; j <= dy; ++j) p(0, j) = c.eta_y[j - 1] - c.eta_xy.col(j - 1).sum();
  p(0, 0) = 1.0 - c.eta_x.sum() - c.eta_y.sum() + c.eta_xy.sum();
  for (Eigen::Index x = 0; x <= dx; ++x) {
    for (Eigen::Index y = 0; y <= dy; ++y) {
      if (!(p(x, y) >= kMinCellProbability)) {
        std::ostringstream os;
        os << "expectation coordinates imply cell (" << x << ", " << y << ") = " << p(x, y);
        throw InvalidArgument(os.str());
      }
    }
  }
  return JointDistribution(std::move(p));
}

ExpectationCoords expectation_from_natural(const NaturalCoords& c) {
  return to_expectation(from_natural(c));
}

}  // namespace mhtest
