#pragma once

#include "mhtest/distribution.hpp"

namespace mhtest {

// Natural (log-linear) coordinates relative to the reference cell (0, 0):
//   theta_x[i-1]      = log p(i,0)/p(0,0)
//   theta_y[j-1]      = log p(0,j)/p(0,0)
//   theta_xy(i-1,j-1) = log p(i,j)p(0,0) / (p(i,0)p(0,j))
// theta_xy == 0 exactly when the distribution is the product of its marginals.
struct NaturalCoords {
  Vector theta_x;   // |X|-1
  Vector theta_y;   // |Y|-1
  Table theta_xy;   // (|X|-1) x (|Y|-1)
};

// Mixture coordinates: marginal masses of the non-reference symbols and the
// joint masses of the non-reference cells.
struct ExpectationCoords {
  Vector eta_x;   // P_X(i), i >= 1
  Vector eta_y;   // P_Y(j), j >= 1
  Table eta_xy;   // P(i,j), i,j >= 1
};

NaturalCoords to_natural(const JointDistribution& d);
JointDistribution from_natural(const NaturalCoords& c);

// Log-partition function: log of the unnormalized mass, equal to -log p(0,0).
double potential(const NaturalCoords& c);

ExpectationCoords to_expectation(const JointDistribution& d);

// Throws InvalidArgument if the coordinates imply a cell below the support
// threshold (including negative cells).
JointDistribution from_expectation(const ExpectationCoords& c);

// Gradient of the potential, i.e. the expectation coordinates of from_natural(c).
ExpectationCoords expectation_from_natural(const NaturalCoords& c);

}  // namespace mhtest
