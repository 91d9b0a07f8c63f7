#include <gtest/gtest.h>

#include <cmath>

#include "../oracles.hpp"
#include "mhtest/errors.hpp"
#include "mhtest/exact_eval.hpp"
#include "mhtest/projection.hpp"

using namespace mhtest;

namespace {

Vector freq(const std::vector<int>& c) { return frequencies(c); }

}  // namespace

TEST(ExactEval, ExtremeThresholds) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const ExactEvaluator ev(p, q, 12);
  const LambdaSolution s = solve_lambda_pair(p, q, 0.0);
  const ErrorPoint hi = ev.np_like(s.llr, 0.0, s.llr.table.maxCoeff() + 1.0);
  EXPECT_EQ(hi.alpha, 1.0);
  EXPECT_EQ(hi.beta, 0.0);
  const ErrorPoint lo = ev.np_like(s.llr, 0.0, s.llr.table.minCoeff() - 1.0);
  EXPECT_EQ(lo.alpha, 0.0);
  EXPECT_EQ(lo.beta, 1.0);
}

TEST(ExactEval, Completeness) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const ExactEvaluator ev(p, q, 15);
  LambdaPath path(p, q);
  const MarginalRule rule = make_rule(SchemeSpec::np_like(0.03), path);
  std::vector<Hypothesis> d;
  for (const auto& pr : ev.table().pairs) d.push_back(rule(pr.x_counts, pr.y_counts));
  const ErrorPoint pt = ev.evaluate(d);
  const auto [acc_p, acc_q] = ev.accept_masses(d);
  EXPECT_NEAR(pt.alpha + acc_p, 1.0, 1e-10);
  EXPECT_NEAR(pt.beta + (1.0 - acc_q), 1.0, 1e-10);
}

TEST(ExactEval, MatchesOutcomeBruteForce) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  LambdaPath path(p, q);
  for (int n : {3, 6}) {
    const ExactEvaluator ev(p, q, n);
    for (double lambda : {-0.1, 0.0, 0.1}) {
      const LambdaSolution s = path.solve(lambda);
      const ErrorPoint pt = ev.np_like(s.llr, lambda, lambda);
      const auto [a, b] = oracle::brute_force_errors(p, q, n, [&](const auto& cx, const auto& cy) {
        return s.llr.statistic(freq(cx), freq(cy)) > lambda + kTieTolerance;
      });
      EXPECT_NEAR(pt.alpha, a, 1e-10);
      EXPECT_NEAR(pt.beta, b, 1e-10);
    }
    for (double r : {0.02, 0.08, 0.15}) {
      const ErrorPoint pt = ev.hk(r);
      const auto [a, b] = oracle::brute_force_errors(p, q, n, [&](const auto& cx, const auto& cy) {
        return projected_divergence_to_marginals(p, freq(cx), freq(cy)) < r - kTieTolerance;
      });
      EXPECT_NEAR(pt.alpha, a, 1e-10);
      EXPECT_NEAR(pt.beta, b, 1e-10);
    }
  }
}

TEST(ExactEval, Monotonicity) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const ExactEvaluator ev(p, q, 25);
  const LambdaSolution s = solve_lambda_pair(p, q, 0.0);
  ErrorPoint prev = ev.np_like(s.llr, 0.0, -0.3);
  for (double tau = -0.28; tau < 0.3; tau += 0.02) {
    const ErrorPoint cur = ev.np_like(s.llr, 0.0, tau);
    EXPECT_GE(cur.alpha, prev.alpha);
    EXPECT_LE(cur.beta, prev.beta);
    prev = cur;
  }
  ErrorPoint hprev = ev.hk(0.005);
  for (double r = 0.01; r < 0.3; r += 0.01) {
    const ErrorPoint cur = ev.hk(r);
    EXPECT_LE(cur.alpha, hprev.alpha);
    EXPECT_GE(cur.beta, hprev.beta);
    hprev = cur;
  }
}

TEST(ExactEval, ResourceCap) {
  EXPECT_THROW(ExactEvaluator(oracle::example_p(), oracle::example_q(), 100, 1000), ResourceCapExceeded);
}

TEST(ExactEval, DeterministicAcrossThreadCounts) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const ExactEvaluator one(p, q, 40, kDefaultMaxTypes, 1);
  const ExactEvaluator many(p, q, 40, kDefaultMaxTypes, 4);
  const ErrorPoint a = one.hk(0.05), b = many.hk(0.05);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_EQ(a.beta, b.beta);
}

TEST(ExactTradeoff, FacadeMatchesEvaluator) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const ExactEvaluator ev(p, q, 20);
  const ErrorPoint direct = ev.hk(0.06);
  const ErrorPoint facade = exact_tradeoff(SchemeSpec::hk(0.06), p, q, 20);
  EXPECT_EQ(direct.alpha, facade.alpha);
  EXPECT_EQ(direct.beta, facade.beta);
  EXPECT_THROW(exact_tradeoff(SchemeSpec::np_like(1.0), p, q, 20), RangeError);
}

TEST(Ppv, MomentsAndScaling) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const ProjectionResult star = project_onto_marginals(q, p.marginal_x(), p.marginal_y());
  const Table j = star.projection.table().array().log() - q.table().array().log();
  double mean = 0.0;
  for (int i = 0; i < 4; ++i) mean += star.projection.table()(i) * j(i);
  double var = 0.0, t3 = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double d = j(i) - mean;
    var += star.projection.table()(i) * d * d;
    t3 += star.projection.table()(i) * std::abs(d * d * d);
  }
  const PpvMoments m = ppv_moments(p, q);
  EXPECT_NEAR(m.sigma, std::sqrt(var), 1e-12);
  EXPECT_NEAR(m.t3, t3, 1e-12);
  const double tau = 0.16;
  const int n = 10;
  EXPECT_NEAR(ppv_beta_bound(p, q, 4 * n, tau) / ppv_beta_bound(p, q, n, tau), std::exp(-3 * tau * n) / 2, 1e-15);
  EXPECT_THROW(ppv_beta_bound(p, p, 10, 0.1), RangeError);
}

TEST(MonteCarlo, EqualHypotheses) {
  const auto p = oracle::example_p();
  const McEstimate e = monte_carlo_tradeoff(SchemeSpec::np_like(0.0), p, p, 30, 20000, 3);
  EXPECT_NEAR(e.alpha_hat + e.beta_hat, 1.0, 3.0 * (e.half_width_alpha + e.half_width_beta));
}

TEST(MonteCarlo, Deterministic) {
  const auto p = oracle::example_p();
  const auto q = oracle::example_q();
  const McEstimate a = monte_carlo_tradeoff(SchemeSpec::hk(0.05), p, q, 30, 10000, 7);
  const McEstimate b = monte_carlo_tradeoff(SchemeSpec::hk(0.05), p, q, 30, 10000, 7);
  EXPECT_EQ(a.alpha_hat, b.alpha_hat);
  EXPECT_EQ(a.beta_hat, b.beta_hat);
  const McEstimate c = monte_carlo_tradeoff(SchemeSpec::hk(0.05), p, q, 30, 10000, 8);
  EXPECT_NE(a.alpha_hat, c.alpha_hat);
}

TEST(MonteCarlo, CounterRngKnownValues) {
  // SplitMix64 finalizer of 0 and of the golden-ratio increment.
  EXPECT_EQ(CounterRng::mix(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);
  CounterRng a(1, 2, 0), b(1, 2, 0), c(1, 2, 1);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(a.next_u64(), c.next_u64());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.next_uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}
