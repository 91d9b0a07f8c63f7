#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhtest/distribution.hpp"
#include "mhtest/joint_types.hpp"
#include "mhtest/lambda_solver.hpp"
#include "mhtest/projection.hpp"

namespace mhtest {

enum class Hypothesis { h0, h1 };
enum class SchemeKind { np_like, hk, oracle };

std::string to_string(SchemeKind kind);
std::string to_string(Hypothesis h);

// Statistics within this distance of the threshold count as ties and decide H1.
inline constexpr double kTieTolerance = 1e-12;

struct SchemeSpec {
  SchemeKind kind = SchemeKind::np_like;
  double lambda = 0.0;  // np_like only
  double tau = 0.0;     // np_like and oracle
  double r = 0.0;       // hk only

  static SchemeSpec np_like(double lambda, double tau);
  // lambda = tau.
  static SchemeSpec np_like(double tau);
  static SchemeSpec hk(double r);
  static SchemeSpec oracle(double tau);

  // tau for np_like and oracle, r for hk.
  double parameter() const;
};

// Checks the parameter ranges: lambda in [-E(Q||P), E(P||Q)] for np_like,
// r > 0 for hk. Throws RangeError.
void validate_scheme(const SchemeSpec& spec, double e_pq, double e_qp);

// One operating point. log fields are -inf when the probability is 0.
struct ErrorPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double log_alpha = 0.0;
  double log_beta = 0.0;
  SchemeKind scheme = SchemeKind::np_like;
  double lambda = 0.0;     // NaN unless np_like
  double parameter = 0.0;  // tau or r
  int n = 0;
};

// tx, ty are marginal frequency vectors (each sums to 1).
// H0 iff sum_x sum_y tx(x) ty(y) stat(x,y) > tau, computed as
// sum tx a1 + sum ty a2.
double np_like_statistic(const Vector& tx, const Vector& ty, const ProxyLLR& llr);
Hypothesis np_like_decide(const Vector& tx, const Vector& ty, const ProxyLLR& llr, double tau);
// (1/n) sum_{x,y} t(x,y) stat(x,y) for a joint type; agrees with the marginal form.
double np_like_statistic(const JointType& t, const ProxyLLR& llr);

// E(tx x ty || P); zero entries in the types are allowed.
double hk_statistic(const Vector& tx, const Vector& ty, const JointDistribution& p,
                    const ProjectionOptions& opts = {});
// H0 iff E(tx x ty || P) < r.
Hypothesis hk_decide(const Vector& tx, const Vector& ty, const JointDistribution& p, double r,
                     const ProjectionOptions& opts = {});

Vector frequencies(std::span<const int> counts);

// Probability that the pair of marginal types equals (x_counts, y_counts)
// under P^n and under Q^n, in logs.
struct MarginalTypePair {
  std::vector<int> x_counts;
  std::vector<int> y_counts;
  double log_p = 0.0;
  double log_q = 0.0;
  double llr() const { return log_p - log_q; }
};

// All marginal type pairs at blocklength n. Pair (ix, iy) sits at
// ix * y_types.size() + iy; types are listed in composition order.
struct MarginalTypeTable {
  int n = 0;
  std::vector<std::vector<int>> x_types;
  std::vector<std::vector<int>> y_types;
  std::vector<MarginalTypePair> pairs;
};

// Sums joint type-class masses per marginal pair. Chunks of the enumeration
// run on worker threads; the merge order is fixed, so results are identical
// for any thread count.
MarginalTypeTable marginal_type_masses(const JointDistribution& p, const JointDistribution& q,
                                       int n, std::uint64_t max_types = kDefaultMaxTypes,
                                       unsigned threads = 0);

inline constexpr int kOracleMaxBlocklength = 60;

// Log-likelihood ratio of every marginal type pair. Throws ResourceCapExceeded
// when n > max_n or the joint types exceed max_types.
std::vector<MarginalTypePair> oracle_marginal_type_llr(const JointDistribution& p,
                                                       const JointDistribution& q, int n,
                                                       std::uint64_t max_types = kDefaultMaxTypes,
                                                       int max_n = kOracleMaxBlocklength);

// Operating points of the likelihood-ratio test on the marginal type pair,
// one per distinct ratio (ties within kTieTolerance grouped), ordered by
// increasing alpha from (0, 1) to (1, 0).
std::vector<ErrorPoint> oracle_tradeoff(const JointDistribution& p, const JointDistribution& q,
                                        int n, std::uint64_t max_types = kDefaultMaxTypes,
                                        int max_n = kOracleMaxBlocklength);
std::vector<ErrorPoint> oracle_tradeoff(const MarginalTypeTable& table);

// Lower envelope reachable by randomizing between adjacent oracle points:
// linear interpolation of beta over alpha.
double envelope_beta(const std::vector<ErrorPoint>& envelope, double alpha);
bool envelope_dominates(const std::vector<ErrorPoint>& envelope, const ErrorPoint& point,
                        double slack = 1e-12);

}  // namespace mhtest
