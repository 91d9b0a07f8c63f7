#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../oracles.hpp"
#include "mhtest/asymptotics.hpp"
#include "mhtest/errors.hpp"
#include "mhtest/normal.hpp"
#include "mhtest/projection.hpp"

using namespace mhtest;

namespace {

std::vector<double> grid(double a, double b, int steps) {
  std::vector<double> out;
  for (int i = 0; i < steps; ++i) out.push_back(a + (b - a) * i / (steps - 1));
  out.back() = b;
  return out;
}

}  // namespace

TEST(ExponentCurves, OptimalCurveEndpointsAndIdentity) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  LambdaPath path(p, q);
  const auto curve = optimal_exponent_curve(path, grid(-path.e_qp(), path.e_pq(), 21));
  EXPECT_NEAR(curve.front().type1_exponent, path.e_qp(), 1e-12);
  EXPECT_EQ(curve.front().type2_exponent, 0.0);
  EXPECT_EQ(curve.back().type1_exponent, 0.0);
  EXPECT_NEAR(curve.back().type2_exponent, path.e_pq(), 1e-12);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_NEAR(curve[i].type2_exponent - curve[i].type1_exponent, curve[i].lambda, 1e-8);
    if (i > 0) {
      EXPECT_LT(curve[i].type1_exponent, curve[i - 1].type1_exponent);
      EXPECT_GT(curve[i].type2_exponent, curve[i - 1].type2_exponent);
    }
    if (i > 0 && i + 1 < curve.size()) {
      EXPECT_NEAR(path.exponent_F(curve[i].type1_exponent), curve[i].type2_exponent, 1e-5);
    }
  }
}

TEST(ExponentCurves, FixedCurvesBelowOptimal) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  LambdaPath path(p, q);
  for (Endpoint which : {Endpoint::upper, Endpoint::lower}) {
    const auto [lo, hi] = fixed_lambda_tau_range(path, which);
    const auto curve = fixed_lambda_curve(path, which, grid(lo, hi, 15));
    const double own = which == Endpoint::upper ? path.e_pq() : -path.e_qp();
    for (const auto& pt : curve) {
      // F at the same type-I exponent bounds the type-II exponent.
      if (pt.type1_exponent <= path.e_qp()) {
        EXPECT_LE(pt.type2_exponent, path.exponent_F(pt.type1_exponent) + 1e-8);
      }
      if (std::abs(pt.tau - own) < 1e-15) {
        const LambdaSolution s = path.endpoint(which);
        EXPECT_NEAR(pt.type1_exponent, s.type1_exponent, 1e-9);
        EXPECT_NEAR(pt.type2_exponent, s.type2_exponent, 1e-9);
      }
    }
    const auto first = fixed_lambda_curve(path, which, {which == Endpoint::upper ? lo : hi});
    if (which == Endpoint::upper) {
      EXPECT_NEAR(first[0].type2_exponent, 0.0, 1e-12);
    } else {
      EXPECT_NEAR(first[0].type1_exponent, 0.0, 1e-12);
    }
    EXPECT_THROW(fixed_lambda_curve(path, which, {hi + 0.01}), RangeError);
  }
}

TEST(Trajectory, ParallelDisplacement) {
  LambdaPath path(oracle::example_p(), oracle::example_q());
  for (const auto& pt : lambda_trajectory(path, grid(-path.e_qp(), path.e_pq(), 11))) {
    EXPECT_LT(pt.parallel_residual, 1e-6);
  }
}

TEST(SecondOrder, StatsOfExample) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const SecondOrderStats s = second_order_stats(p, q);
  EXPECT_NEAR(s.e, oracle::projected_entropy_1d(p, q), 1e-11);
  EXPECT_NEAR(expectation(p.table(), s.density), s.e, 1e-14);
  EXPECT_NEAR(s.v, 0.6281339441003413, 1e-12);
  EXPECT_NEAR(s.t3, 0.5919161195641268, 1e-12);
  const SecondOrderStats same = second_order_stats(p, p);
  EXPECT_NEAR(same.e, 0.0, 1e-15);
  EXPECT_NEAR(same.v, 0.0, 1e-15);
}

TEST(SecondOrder, EqualCorrelationUsesPlainRatio) {
  const auto p = oracle::example_p();
  Table t = p.table();
  t.row(0) *= 3.0;
  t.col(1) *= 0.5;
  const auto q = JointDistribution::normalized(t);
  const SecondOrderStats s = second_order_stats(p, q);
  const Table llr = p.table().array().log() - q.table().array().log();
  EXPECT_LT((s.density - llr).cwiseAbs().maxCoeff(), 1e-10);
  const double mean = expectation(p.table(), llr);
  EXPECT_NEAR(s.v, expectation(p.table(), (llr.array() - mean).square().matrix()), 1e-10);
}

TEST(SecondOrder, Threshold) {
  SecondOrderStats s;
  s.e = 0.2;
  s.v = 0.5;
  s.t3 = 0.0;
  EXPECT_NEAR(np_threshold_for_eps(s, 100, 0.5), 0.2, 1e-15);
  EXPECT_NEAR(np_threshold_for_eps(s, 100, 0.1), 0.2 + std::sqrt(0.005) * normal_quantile(0.1), 1e-15);
  double prev = -1.0;
  for (int n : {10, 100, 1000, 100000}) {
    const double tau = np_threshold_for_eps(s, n, 0.1);
    EXPECT_GT(tau, prev);
    prev = tau;
  }
  EXPECT_NEAR(prev, 0.2, 0.01);
  const SecondOrderStats ex = second_order_stats(oracle::example_p(), oracle::example_q());
  EXPECT_THROW(np_threshold_for_eps(ex, 100, 0.1), RangeError);
  const int nmin = min_blocklength_for_eps(ex, 0.1);
  EXPECT_NO_THROW(np_threshold_for_eps(ex, nmin, 0.1));
  EXPECT_THROW(np_threshold_for_eps(ex, nmin - 1, 0.1), RangeError);
}

TEST(SecondOrder, Approximation) {
  const SecondOrderStats s = second_order_stats(oracle::example_p(), oracle::example_q());
  const int n = 50;
  const double eps = 0.2;
  const double diff = second_order_beta_approx(s, 4 * n, eps) - second_order_beta_approx(s, n, eps);
  EXPECT_NEAR(diff, 3 * n * s.e + std::sqrt(s.v * n) * normal_quantile(eps) + 0.5 * std::log(4.0), 1e-12);
  EXPECT_NEAR(second_order_beta_approx(s, n, 0.5), n * s.e + 0.5 * std::log(n), 1e-12);
}

TEST(Taylor, Residuals) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  EXPECT_NEAR(taylor_residual(p, q, p), 0.0, 1e-12);
  // Same marginals, different correlation.
  Table t = p.table();
  t(0, 0) -= 0.05;
  t(1, 1) -= 0.05;
  t(0, 1) += 0.05;
  t(1, 0) += 0.05;
  EXPECT_NEAR(taylor_residual(p, q, JointDistribution(t)), 0.0, 1e-9);

  Table dir(2, 2);
  dir << -0.7, 0.2, 0.1, 0.4;
  double prev_ratio = std::numeric_limits<double>::infinity();
  for (double delta : {0.04, 0.02, 0.01, 0.005}) {
    const JointDistribution pbar(p.table() + delta * dir);
    const double ratio = taylor_residual(p, q, pbar) / (delta * dir.cwiseAbs().sum());
    EXPECT_LT(ratio, prev_ratio);
    prev_ratio = ratio;
  }
  EXPECT_LT(prev_ratio, 0.01);
}

TEST(Gradient, MatchesDensity) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const GradientCheck g = projected_entropy_gradient(p, q, 1e-5);
  EXPECT_LT(g.max_discrepancy, 1e-5);
  EXPECT_LT(g.max_xy_derivative, 1e-6);
  const double coarse = projected_entropy_gradient_check(p, q, 2e-2);
  const double fine = projected_entropy_gradient_check(p, q, 1e-2);
  EXPECT_GT(coarse / fine, 3.0);
  EXPECT_LT(coarse / fine, 5.0);
}

TEST(Normal, Values) {
  EXPECT_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-16);
  EXPECT_NEAR(normal_cdf(1.6448536269514722), static_cast<double>(oracle::normal_cdf_series(1.6448536269514722L)), 1e-15);
  EXPECT_NEAR(normal_cdf(1.6448536269514722), 0.95, 1e-15);
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    EXPECT_NEAR(normal_cdf(x), static_cast<double>(oracle::normal_cdf_series(x)), 1e-14) << x;
  }
  for (double pr : {1e-12, 1e-8, 0.001, 0.02, 0.3, 0.5, 0.77, 0.975, 0.999999}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(pr)), pr, 1e-9 * std::max(1.0, pr));
  }
  EXPECT_THROW(normal_quantile(0.0), InvalidArgument);
  EXPECT_THROW(normal_quantile(1.0), InvalidArgument);
}
