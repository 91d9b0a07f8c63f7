#include "mhtest/tilted.hpp"

#include <cmath>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

TiltedFamily::TiltedFamily(JointDistribution base, ProxyLLR direction, TiltSide side)
    : base_(std::move(base)), direction_(std::move(direction)), side_(side) {
  if (direction_.table.rows() != base_.x_size() || direction_.table.cols() != base_.y_size()) {
    throw InvalidArgument("tilted family: statistic table does not match the base alphabet");
  }
  if (!direction_.table.allFinite()) throw InvalidArgument("tilted family: statistic is not finite");
  log_base_ = base_.table().array().log();
  min_stat_ = direction_.table.minCoeff();
  max_stat_ = direction_.table.maxCoeff();
}

TiltedFamily::Moments TiltedFamily::moments(double param) const {
  const Table w = log_base_ + param * direction_.table;
  const double m = w.maxCoeff();
  const Table e = (w.array() - m).exp();
  const double z = e.sum();
  const double mean = (e.array() * direction_.table.array()).sum() / z;
  const double var =
      (e.array() * (direction_.table.array() - mean).square()).sum() / z;
  return {m + std::log(z), mean, var};
}

double TiltedFamily::psi(double param) const { return moments(param).psi; }
double TiltedFamily::psi_prime(double param) const { return moments(param).mean; }
double TiltedFamily::psi_second(double param) const { return moments(param).var; }

Table TiltedFamily::member_table(double param) const {
  const double ps = psi(param);
  return (log_base_.array() + param * direction_.table.array() - ps).exp();
}

JointDistribution TiltedFamily::member(double param) const {
  return JointDistribution::normalized(member_table(param));
}

double TiltedFamily::divergence(double param) const {
  const Moments mo = moments(param);
  return std::max(0.0, param * mo.mean - mo.psi);
}

double TiltedFamily::inverse(double tau) const {
  if (!(tau > min_stat_ && tau < max_stat_)) {
    std::ostringstream os;
    os << "tau = " << tau << " is not inside the open range (" << min_stat_ << ", " << max_stat_
       << ") of the statistic";
    throw RangeError(os.str());
  }
  // Bracket, then Newton steps that fall back to bisection when they leave it.
  double lo = -1.0, hi = 1.0;
  while (psi_prime(lo) > tau) {
    hi = lo;
    lo *= 2.0;
    if (lo < -1e300) throw RangeError("inverse_tilt: no finite parameter reaches tau");
  }
  while (psi_prime(hi) < tau) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw RangeError("inverse_tilt: no finite parameter reaches tau");
  }
  const double scale = std::max(1.0, std::abs(tau));
  double s = 0.5 * (lo + hi);
  if (lo < 0.0 && hi > 0.0) s = 0.0;
  for (int it = 0; it < 300; ++it) {
    const Moments mo = moments(s);
    const double g = mo.mean - tau;
    if (std::abs(g) <= 4e-16 * scale) return s;
    if (g > 0.0) {
      hi = s;
    } else {
      lo = s;
    }
    double next = mo.var > 0.0 ? s - g / mo.var : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s || hi - lo <= 1e-16 * std::max(1.0, std::abs(s))) return next;
    s = next;
  }
  return s;
}

double tilted_psi(const JointDistribution& base, const ProxyLLR& llr, double param) {
  return TiltedFamily(base, llr).psi(param);
}

JointDistribution tilted_member(const JointDistribution& base, const ProxyLLR& llr, double param) {
  return TiltedFamily(base, llr).member(param);
}

double inverse_tilt(const JointDistribution& base, const ProxyLLR& llr, double tau) {
  return TiltedFamily(base, llr).inverse(tau);
}

}  // namespace mhtest
