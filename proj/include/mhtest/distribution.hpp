#pragma once

#include <Eigen/Dense>

#include <utility>

namespace mhtest {

// Row index is x, column index is y.
using Table = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cells below this value are rejected; the model assumes full support.
inline constexpr double kMinCellProbability = 1e-12;
inline constexpr double kNormalizationTolerance = 1e-12;

// Strictly positive joint distribution on a finite product alphabet X x Y.
// Immutable once constructed.
class JointDistribution {
 public:
  // Validates positivity and normalization; throws InvalidArgument.
  explicit JointDistribution(Table p);

  // Divides by the total mass first. Still requires every cell to be positive.
  static JointDistribution normalized(Table p);

  static JointDistribution uniform(int x_size, int y_size);
  static JointDistribution product(const Vector& px, const Vector& py);

  int x_size() const noexcept { return static_cast<int>(p_.rows()); }
  int y_size() const noexcept { return static_cast<int>(p_.cols()); }
  double operator()(int x, int y) const { return p_(x, y); }
  const Table& table() const noexcept { return p_; }

  Vector marginal_x() const { return p_.rowwise().sum(); }
  Vector marginal_y() const { return p_.colwise().sum().transpose(); }

 private:
  Table p_;
};

std::pair<Vector, Vector> marginals(const JointDistribution& d);

// D(p||q) in nats. p may contain zeros (0 log 0 = 0); q must be positive
// wherever p is. Throws InvalidArgument on dimension mismatch.
double kl_divergence(const Table& p, const Table& q);
double kl_divergence(const JointDistribution& p, const JointDistribution& q);

// Expectation of f under p.
double expectation(const Table& p, const Table& f);

// Checks that v is a probability vector (entries >= 0, sum 1 within tolerance).
bool is_probability_vector(const Vector& v, double tol = 1e-9);

}  // namespace mhtest
