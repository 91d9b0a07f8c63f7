#pragma once

namespace mhtest {

// Standard normal distribution function, from the complementary error function.
double normal_cdf(double x);

// Inverse of normal_cdf on (0, 1): rational approximation followed by one
// Newton step. Throws InvalidArgument outside the open interval.
double normal_quantile(double p);

}  // namespace mhtest
