#pragma once

#include <cstdint>
#include <vector>

#include "mhtest/distribution.hpp"
#include "mhtest/joint_types.hpp"

namespace mhtest {

struct ProjectionOptions {
  // Stop once both marginals are within tol in total variation.
  double tol = 1e-12;
  int max_iter = 100'000;
  // Keep the per-iteration marginal residual in ProjectionResult::trace.
  bool record_trace = false;
};

struct ProjectionResult {
  JointDistribution projection;
  double value = 0.0;      // D(projection || q)
  int iterations = 0;
  double residual = 0.0;   // total-variation marginal mismatch at exit
  std::vector<double> trace;
};

// Same result for a table that may carry zero cells: used when the requested
// marginals have empty symbols, as happens with types.
struct TableProjection {
  Table projection;
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> trace;
};

// I-projection of q onto the set of distributions with marginals (mx, my), by
// alternating row and column scaling. The result shares q's interaction
// coordinates. Marginals must be strictly positive probability vectors.
// Throws InvalidArgument on bad marginals and ConvergenceError after max_iter.
ProjectionResult project_onto_marginals(const JointDistribution& q, const Vector& mx,
                                        const Vector& my, const ProjectionOptions& opts = {});

// As above but marginals may contain zeros; the projection is then supported
// on the product of the marginal supports.
TableProjection project_table_onto_marginals(const JointDistribution& q, const Vector& mx,
                                             const Vector& my, const ProjectionOptions& opts = {});

// min D(r || q) over r with marginals (mx, my). 2x2 inputs use the closed form.
double projected_divergence_to_marginals(const JointDistribution& q, const Vector& mx,
                                         const Vector& my, const ProjectionOptions& opts = {});

// The minimizing table itself: closed form for 2x2, scaling otherwise.
Table projected_table(const JointDistribution& q, const Vector& mx, const Vector& my,
                      const ProjectionOptions& opts = {});

// E(p || q): min D(r || q) over r with the marginals of p.
double projected_relative_entropy(const JointDistribution& p, const JointDistribution& q,
                                  const ProjectionOptions& opts = {});
// Accepts a table with zero cells (e.g. type frequencies).
double projected_relative_entropy(const Table& p, const JointDistribution& q,
                                  const ProjectionOptions& opts = {});

// Joint mass of cell (1,1) for the 2x2 distribution with P_X(1) = eta_x,
// P_Y(1) = eta_y and interaction coordinate theta_xy. Closed-form root of the
// quadratic, clamped to the Frechet bounds. Endpoint marginals (0 or 1) are
// accepted and return the forced value.
double binary_eta_xy(double eta_x, double eta_y, double theta_xy);

// 2x2 projection table built from binary_eta_xy; cells may be zero when the
// marginals are degenerate.
Table binary_projection_table(const JointDistribution& q, const Vector& mx, const Vector& my);

// |D(p||q) - D(p||p*) - D(p*||q)| with p* the projection of q onto p's marginals.
double pythagorean_residual(const JointDistribution& p, const JointDistribution& q,
                            const ProjectionOptions& opts = {});

// min D(r || q) over joint types r with denominator t.n() and the marginals of
// t, found by exhaustive enumeration. Throws ResourceCapExceeded if more than
// max_types candidates are visited.
double projected_relative_entropy_over_types(const JointType& t, const JointDistribution& q,
                                             std::uint64_t max_types = kDefaultMaxTypes);

// Upper bound on E_n - E for types at blocklength n:
//   nu = 4(|X|-1)(|Y|-1)/n,  gap = nu log(|X||Y|/nu) + nu max log(1/q).
double type_restriction_gap(int n, const JointDistribution& q);

}  // namespace mhtest
