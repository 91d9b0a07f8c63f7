#pragma once

#include <map>
#include <utility>

#include "mhtest/distribution.hpp"
#include "mhtest/projection.hpp"

namespace mhtest {

// Additively separable statistic table(x,y) = a1(x) + a2(y). The table is
// rebuilt from the two parts, so the identity holds exactly.
struct ProxyLLR {
  Table table;
  Vector a1;  // over X
  Vector a2;  // over Y

  // Builds the parts with additive_decomposition at reference cell (0,0).
  static ProxyLLR from_table(const Table& table);
  static ProxyLLR from_parts(Vector a1, Vector a2);

  // sum_x tx(x) a1(x) + sum_y ty(y) a2(y) for marginal frequencies tx, ty.
  double statistic(const Vector& tx, const Vector& ty) const;
};

// a1(x) = T(x, ref_y), a2(y) = T(ref_x, y) - T(ref_x, ref_y).
// Throws InvalidArgument if a1(x) + a2(y) misses T by more than 1e-6.
std::pair<Vector, Vector> additive_decomposition(const Table& table, int ref_x = 0,
                                                 int ref_y = 0);

// max |T(x,y) - a1(x) - a2(y)|.
double additive_residual(const Table& table, const Vector& a1, const Vector& a2);

struct LambdaSolution {
  double lambda = 0.0;
  JointDistribution p_lambda;
  JointDistribution q_lambda;
  // log(p_lambda/P) = a log(q_lambda/Q) + b. The solver works with the tilt
  // t = a/(1-a), which runs from 0 at the upper endpoint to -1 at the lower
  // one; a itself is -infinity and b undefined (NaN) at the lower endpoint.
  double a = 0.0;
  double b = 0.0;
  double tilt = 0.0;
  double type1_exponent = 0.0;  // D(p_lambda || P)
  double type2_exponent = 0.0;  // D(q_lambda || Q)
  double residual = 0.0;        // max-norm of the defining system at exit
  int iterations = 0;
  ProxyLLR llr;
};

struct SolverOptions {
  double tol = 1e-12;          // target max-norm residual
  double accept_tol = 1e-9;    // accepted when Newton stalls below this
  int max_iter = 100;
  double fd_step = 1e-7;
  int max_halvings = 30;
  double continuation_step = 0.05;
  ProjectionOptions projection{1e-13, 100'000, false};
};

enum class Endpoint { upper, lower };

// Solver for one (P, Q) pair. Keeps every solved point and warm-starts new
// requests from the nearest one, stepping at most continuation_step in lambda.
class LambdaPath {
 public:
  LambdaPath(JointDistribution p, JointDistribution q, SolverOptions opts = {});

  const JointDistribution& p() const noexcept { return p_; }
  const JointDistribution& q() const noexcept { return q_; }
  // E(P||Q) and E(Q||P): the admissible lambda range is [-e_qp, e_pq].
  double e_pq() const noexcept { return e_pq_; }
  double e_qp() const noexcept { return e_qp_; }
  const SolverOptions& options() const noexcept { return opts_; }

  LambdaSolution endpoint(Endpoint which) const;

  // Closed interval; the endpoints return endpoint(). Throws RangeError
  // outside it and ConvergenceError if no solution is found.
  LambdaSolution solve(double lambda);

  // F(r) = D(Q^lambda || Q) at the lambda with D(P^lambda || P) = r.
  double exponent_F(double r);
  double lambda_of_r(double r) { return -r + exponent_F(r); }

  // Residual vector of the defining system at shared marginal tails and tilt.
  Vector system_residual(const Vector& z, double lambda) const;

 private:
  struct Eval {
    Vector residual;
    Table p_hat;
    Table q_hat;
  };

  bool feasible(const Vector& z) const;
  Table project(const JointDistribution& base, const Vector& mx, const Vector& my) const;
  Eval evaluate(const Vector& z, double lambda) const;
  // Damped Newton from z; returns the final max-norm residual and updates z.
  double newton(Vector& z, double lambda, int& iterations) const;
  Vector continue_from(double start_lambda, Vector z, double target, int& iterations) const;
  LambdaSolution build(const Vector& z, double lambda, int iterations) const;

  JointDistribution p_;
  JointDistribution q_;
  SolverOptions opts_;
  Table log_p_;
  Table log_q_;
  Vector theta_p_;  // x then y natural coordinates of P
  Vector theta_q_;
  Table p_star_;    // optimizer of E(P||Q)
  Table q_star_;    // optimizer of E(Q||P)
  double e_pq_ = 0.0;
  double e_qp_ = 0.0;
  std::map<double, Vector> cache_;
};

// One-shot wrappers. solve_lambda_pair requires -E(Q||P) < lambda < E(P||Q).
LambdaSolution solve_lambda_pair(const JointDistribution& p, const JointDistribution& q,
                                 double lambda, const SolverOptions& opts = {});
LambdaSolution endpoint_solution(const JointDistribution& p, const JointDistribution& q,
                                 Endpoint which, const SolverOptions& opts = {});
// 0 <= r <= E(Q||P); RangeError otherwise.
double exponent_F(const JointDistribution& p, const JointDistribution& q, double r,
                  const SolverOptions& opts = {});
double lambda_of_r(const JointDistribution& p, const JointDistribution& q, double r,
                   const SolverOptions& opts = {});

}  // namespace mhtest
