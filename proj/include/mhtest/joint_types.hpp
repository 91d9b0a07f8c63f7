#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mhtest/distribution.hpp"

namespace mhtest {

inline constexpr std::uint64_t kDefaultMaxTypes = 50'000'000;

// Empirical distribution with denominator n, stored as row-major counts.
// Zero counts are allowed.
class JointType {
 public:
  JointType(int n, int x_size, int y_size, std::vector<int> counts);

  int n() const noexcept { return n_; }
  int x_size() const noexcept { return x_size_; }
  int y_size() const noexcept { return y_size_; }
  int count(int x, int y) const { return counts_[static_cast<std::size_t>(x * y_size_ + y)]; }
  std::span<const int> counts() const noexcept { return counts_; }

  std::vector<int> x_counts() const;
  std::vector<int> y_counts() const;
  // counts / n as a table.
  Table frequencies() const;

 private:
  int n_;
  int x_size_;
  int y_size_;
  std::vector<int> counts_;
};

// Number of compositions of n into k non-negative parts, C(n+k-1, k-1).
// Saturates at UINT64_MAX.
std::uint64_t composition_count(int n, int k);
std::uint64_t joint_type_count(int n, int x_size, int y_size);

// Throws ResourceCapExceeded if the joint types at blocklength n exceed max_types.
void check_type_cap(int n, int x_size, int y_size, std::uint64_t max_types);

using CountVisitor = std::function<void(std::span<const int>)>;

// Visits every composition of n into k parts exactly once, in lexicographic
// order with the first part descending from n to 0.
void for_each_composition(int n, int k, const CountVisitor& visit);

// Visits the compositions whose first part equals first. The chunks
// first = n, n-1, ..., 0 partition the full enumeration, in the same order.
void for_each_composition_chunk(int n, int k, int first, const CountVisitor& visit);

// Visits every joint type count matrix (row-major) at blocklength n.
void for_each_joint_type(int n, int x_size, int y_size, const CountVisitor& visit,
                         std::uint64_t max_types = kDefaultMaxTypes);

// Streaming enumeration, same order as for_each_joint_type.
class JointTypeEnumerator {
 public:
  JointTypeEnumerator(int n, int x_size, int y_size, std::uint64_t max_types = kDefaultMaxTypes);
  std::optional<JointType> next();

 private:
  int n_;
  int x_size_;
  int y_size_;
  std::vector<int> counts_;
  bool done_ = false;
  bool started_ = false;
};

std::vector<JointType> enumerate_joint_types(int n, int x_size, int y_size,
                                             std::uint64_t max_types = kDefaultMaxTypes);

// Visits every count matrix with the given row and column sums.
void for_each_joint_type_with_marginals(std::span<const int> x_counts,
                                        std::span<const int> y_counts,
                                        const CountVisitor& visit);

double log_factorial(int k);

// log of the multinomial mass of the type class:
//   log n! - sum log c! + sum c log d(x,y)
double log_type_probability(const JointType& t, const JointDistribution& d);
double log_type_probability(std::span<const int> counts, const Table& log_d);

// Probability of a sequence of n i.i.d. symbols landing in counts (a single
// alphabet), used for marginal types.
double log_multinomial_coefficient(std::span<const int> counts);

}  // namespace mhtest
