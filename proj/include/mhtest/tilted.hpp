#pragma once

#include "mhtest/distribution.hpp"
#include "mhtest/lambda_solver.hpp"

namespace mhtest {

// Which hypothesis the family is built on. The Q side is indexed by s >= 0
// in the exponent bounds, the P side by t <= 0; the arithmetic is the same.
enum class TiltSide { q_side, p_side };

// base(x,y) exp{param * stat(x,y) - psi(param)}.
class TiltedFamily {
 public:
  TiltedFamily(JointDistribution base, ProxyLLR direction, TiltSide side = TiltSide::q_side);

  const JointDistribution& base() const noexcept { return base_; }
  const ProxyLLR& direction() const noexcept { return direction_; }
  TiltSide side() const noexcept { return side_; }

  // log sum base exp(param * stat), with a max shift.
  double psi(double param) const;
  // Mean and variance of the statistic under the member; the first and second
  // derivatives of psi.
  double psi_prime(double param) const;
  double psi_second(double param) const;

  Table member_table(double param) const;
  // Throws InvalidArgument if a cell underflows the support threshold.
  JointDistribution member(double param) const;

  // Unique param with psi'(param) = tau. Requires min stat < tau < max stat;
  // throws RangeError otherwise.
  double inverse(double tau) const;

  // D(member(param) || base) = param psi'(param) - psi(param).
  double divergence(double param) const;

  double min_stat() const noexcept { return min_stat_; }
  double max_stat() const noexcept { return max_stat_; }

 private:
  struct Moments {
    double psi;
    double mean;
    double var;
  };
  Moments moments(double param) const;

  JointDistribution base_;
  ProxyLLR direction_;
  TiltSide side_;
  Table log_base_;
  double min_stat_;
  double max_stat_;
};

double tilted_psi(const JointDistribution& base, const ProxyLLR& llr, double param);
JointDistribution tilted_member(const JointDistribution& base, const ProxyLLR& llr, double param);
double inverse_tilt(const JointDistribution& base, const ProxyLLR& llr, double tau);

}  // namespace mhtest
