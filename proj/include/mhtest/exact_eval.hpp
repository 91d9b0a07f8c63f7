#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "mhtest/lambda_solver.hpp"
#include "mhtest/schemes.hpp"

namespace mhtest {

// Decision as a function of the marginal type counts.
using MarginalRule = std::function<Hypothesis(std::span<const int>, std::span<const int>)>;

// Builds the decision rule of a scheme. np_like solves the lambda pair through
// path; hk caches E(tx x ty || P) per marginal pair; oracle needs the table of
// marginal-type masses at the same blocklength (pass nullptr otherwise).
MarginalRule make_rule(const SchemeSpec& spec, LambdaPath& path,
                       const MarginalTypeTable* oracle_table = nullptr);

// Exact error probabilities at one blocklength. Enumerates the joint types
// once and keeps the per-marginal-pair masses; every evaluation afterwards is
// a pass over the marginal pairs.
class ExactEvaluator {
 public:
  ExactEvaluator(JointDistribution p, JointDistribution q, int n,
                 std::uint64_t max_types = kDefaultMaxTypes, unsigned threads = 0);

  int n() const noexcept { return table_.n; }
  const JointDistribution& p() const noexcept { return p_; }
  const JointDistribution& q() const noexcept { return q_; }
  const MarginalTypeTable& table() const noexcept { return table_; }

  // alpha sums P-mass over pairs deciding H1, beta sums Q-mass over pairs
  // deciding H0. Sums run over fixed chunks with a max-log shift and
  // compensated addition, merged in chunk order.
  ErrorPoint evaluate(const std::vector<Hypothesis>& decisions) const;
  ErrorPoint evaluate(const MarginalRule& rule) const;

  ErrorPoint np_like(const ProxyLLR& llr, double lambda, double tau) const;
  ErrorPoint hk(double r) const;
  ErrorPoint oracle(double tau) const;
  std::vector<ErrorPoint> oracle_envelope() const { return oracle_tradeoff(table_); }

  // E(tx x ty || P) per marginal pair, computed on first use.
  const std::vector<double>& hk_statistics() const;

  // P-mass and Q-mass of H0 decisions, for completeness checks.
  std::pair<double, double> accept_masses(const std::vector<Hypothesis>& decisions) const;

 private:
  JointDistribution p_;
  JointDistribution q_;
  MarginalTypeTable table_;
  mutable std::once_flag hk_once_;
  mutable std::vector<double> hk_stats_;
};

struct ExactOptions {
  std::uint64_t max_types = kDefaultMaxTypes;
  unsigned threads = 0;
  SolverOptions solver{};
};

ErrorPoint exact_tradeoff(const SchemeSpec& spec, const JointDistribution& p,
                          const JointDistribution& q, int n, const ExactOptions& opts = {});

// Moments of the projected relative entropy density j = log(P*/Q) with
// (X,Y) ~ P*: variance and absolute third central moment.
struct PpvMoments {
  double sigma = 0.0;
  double t3 = 0.0;
};
PpvMoments ppv_moments(const JointDistribution& p, const JointDistribution& q);

// 2 (log 2/sqrt(2 pi) + 12 T/sigma^2) exp(-tau n) / (sigma sqrt(n)), an upper
// bound on beta of the test built at the upper endpoint with threshold tau.
// Throws RangeError when sigma = 0.
double ppv_beta_bound(const JointDistribution& p, const JointDistribution& q, int n, double tau);

// SplitMix64 evaluated at a counter: draw i of stream (seed, trial, side) is
// mix(base + (i+1) * 0x9e3779b97f4a7c15) with base = mix(seed + mix(2 trial + side + 1)).
// The value depends only on those integers, so streams are reproducible on
// any platform and independent of how trials are split across threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t side);
  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double next_uniform();

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

struct McEstimate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  // 1.96 sqrt(p(1-p)/trials) for each estimate; half_width_95 is the larger.
  double half_width_alpha = 0.0;
  double half_width_beta = 0.0;
  double half_width_95 = 0.0;
  SchemeKind scheme = SchemeKind::np_like;
  double lambda = 0.0;
  double parameter = 0.0;
  int n = 0;
};

McEstimate monte_carlo_tradeoff(const SchemeSpec& spec, const JointDistribution& p,
                                const JointDistribution& q, int n, std::uint64_t trials,
                                std::uint64_t seed, const ExactOptions& opts = {});
// Same with a rule built by the caller.
McEstimate monte_carlo_tradeoff(const MarginalRule& rule, const JointDistribution& p,
                                const JointDistribution& q, int n, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads = 0);

}  // namespace mhtest
