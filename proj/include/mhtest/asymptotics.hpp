#pragma once

#include <vector>

#include "mhtest/coordinates.hpp"
#include "mhtest/lambda_solver.hpp"
#include "mhtest/tilted.hpp"

namespace mhtest {

struct ExponentPoint {
  double type1_exponent = 0.0;
  double type2_exponent = 0.0;
  double lambda = 0.0;
  double tau = 0.0;
};

// (D(P^lambda||P), D(Q^lambda||Q)) at threshold tau = lambda for each lambda
// in the closed interval [-E(Q||P), E(P||Q)].
std::vector<ExponentPoint> optimal_exponent_curve(LambdaPath& path,
                                                  const std::vector<double>& lambdas);
std::vector<ExponentPoint> optimal_exponent_curve(const JointDistribution& p,
                                                  const JointDistribution& q,
                                                  const std::vector<double>& lambdas,
                                                  const SolverOptions& opts = {});

// Admissible thresholds for the statistic frozen at an endpoint:
// upper: [E_Q[stat], E(P||Q)], lower: [-E(Q||P), E_P[stat]].
std::pair<double, double> fixed_lambda_tau_range(const LambdaPath& path, Endpoint which);

// Exponent pairs of the test that keeps the endpoint statistic and moves only
// the threshold. Each side uses its tilted family at the parameter solving
// psi'(param) = tau. Thresholds outside the range throw RangeError.
std::vector<ExponentPoint> fixed_lambda_curve(const LambdaPath& path, Endpoint which,
                                              const std::vector<double>& taus);

// Natural coordinates of the pair along lambda, with the parallel-displacement
// residual max |(1+t)(theta(P^l)-theta(P)) - t(theta(Q^l)-theta(Q))| over the
// marginal coordinates.
struct TrajectoryPoint {
  double lambda = 0.0;
  NaturalCoords p_theta;
  NaturalCoords q_theta;
  double parallel_residual = 0.0;
};
std::vector<TrajectoryPoint> lambda_trajectory(LambdaPath& path, const std::vector<double>& lambdas);

struct SecondOrderStats {
  double e = 0.0;    // E(P||Q)
  double v = 0.0;    // variance of j under P
  double t3 = 0.0;   // absolute third central moment of j under P
  Table density;     // j = log(P*/Q)
};

// Throws ConvergenceError if the projection fails.
SecondOrderStats second_order_stats(const JointDistribution& p, const JointDistribution& q,
                                    const ProjectionOptions& opts = {});

// E + sqrt(V/n) Phi^{-1}(eps - 6T/(sqrt(n) V^{3/2})). Throws RangeError when
// the argument of Phi^{-1} leaves (0, 1) (n too small for eps) or V = 0.
double np_threshold_for_eps(const SecondOrderStats& s, int n, double eps);
double np_threshold_for_eps(const JointDistribution& p, const JointDistribution& q, int n,
                            double eps);

// Smallest n at which np_threshold_for_eps is defined.
int min_blocklength_for_eps(const SecondOrderStats& s, double eps);

// nE + sqrt(nV) Phi^{-1}(eps) + (1/2) log n, an approximation of -log beta
// with the constant term left out.
double second_order_beta_approx(const SecondOrderStats& s, int n, double eps);
double second_order_beta_approx(const JointDistribution& p, const JointDistribution& q, int n,
                                double eps);

// |E(Pbar||Q) - sum Pbar j|.
double taylor_residual(const JointDistribution& p, const JointDistribution& q,
                       const JointDistribution& pbar);

// E(P_eta || Q) with marginals read directly from the expectation coordinates.
double projected_entropy_at(const ExpectationCoords& eta, const JointDistribution& q);

struct GradientCheck {
  Vector numeric;    // x coordinates, y coordinates, then xy coordinates (row-major)
  Vector analytic;
  double max_discrepancy = 0.0;
  double max_xy_derivative = 0.0;
};
GradientCheck projected_entropy_gradient(const JointDistribution& p, const JointDistribution& q,
                                         double step = 1e-5);
// max |numeric - analytic| of the central-difference gradient of E(P_eta||Q)
// at eta(P): j(i,0)-j(0,0), j(0,j)-j(0,0) and 0 for the xy coordinates.
double projected_entropy_gradient_check(const JointDistribution& p, const JointDistribution& q,
                                        double step = 1e-5);

}  // namespace mhtest
