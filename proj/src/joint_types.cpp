#include "mhtest/joint_types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

constexpr int kLogFactorialTableSize = 20'001;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactorialTableSize);
    for (int k = 0; k < kLogFactorialTableSize; ++k) t[k] = std::lgamma(k + 1.0);
    return t;
  }();
  return table;
}

// Advances counts to the next composition in first-part-descending
// lexicographic order. Returns false after the last one.
bool next_composition(std::vector<int>& c) {
  const int k = static_cast<int>(c.size());
  int i = k - 2;
  while (i >= 0 && c[i] == 0) --i;
  if (i < 0) return false;
  int tail = 0;
  for (int j = i + 1; j < k; ++j) {
    tail += c[j];
    c[j] = 0;
  }
  --c[i];
  c[i + 1] = tail + 1;
  return true;
}

}  // namespace

JointType::JointType(int n, int x_size, int y_size, std::vector<int> counts)
    : n_(n), x_size_(x_size), y_size_(y_size), counts_(std::move(counts)) {
  if (n < 1 || x_size < 1 || y_size < 1) {
    throw InvalidArgument("joint type: n and alphabet sizes must be positive");
  }
  if (counts_.size() != static_cast<std::size_t>(x_size) * static_cast<std::size_t>(y_size)) {
    throw InvalidArgument("joint type: count vector has the wrong length");
  }
  long long total = 0;
  for (int c : counts_) {
    if (c < 0) throw InvalidArgument("joint type: negative count");
    total += c;
  }
  if (total != n) {
    std::ostringstream os;
    os << "joint type: counts sum to " << total << ", expected " << n;
    throw InvalidArgument(os.str());
  }
}

std::vector<int> JointType::x_counts() const {
  std::vector<int> out(static_cast<std::size_t>(x_size_), 0);
  for (int x = 0; x < x_size_; ++x) {
    for (int y = 0; y < y_size_; ++y) out[x] += count(x, y);
  }
  return out;
}

std::vector<int> JointType::y_counts() const {
  std::vector<int> out(static_cast<std::size_t>(y_size_), 0);
  for (int x = 0; x < x_size_; ++x) {
    for (int y = 0; y < y_size_; ++y) out[y] += count(x, y);
  }
  return out;
}

Table JointType::frequencies() const {
  Table t(x_size_, y_size_);
  for (int x = 0; x < x_size_; ++x) {
    for (int y = 0; y < y_size_; ++y) t(x, y) = static_cast<double>(count(x, y)) / n_;
  }
  return t;
}

std::uint64_t composition_count(int n, int k) {
  if (n < 0 || k < 1) return 0;
  // C(n+k-1, k-1) built incrementally; each partial product is itself a
  // binomial coefficient so the division is exact.
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t result = 1;
  const int r = k - 1;
  for (int i = 1; i <= r; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(i);
    if (result > kMax / num) return kMax;
    result = result * num / static_cast<std::uint64_t>(i);
  }
  return result;
}

std::uint64_t joint_type_count(int n, int x_size, int y_size) {
  return composition_count(n, x_size * y_size);
}

void check_type_cap(int n, int x_size, int y_size, std::uint64_t max_types) {
  const std::uint64_t count = joint_type_count(n, x_size, y_size);
  if (count > max_types) {
    std::ostringstream os;
    os << "blocklength " << n << " on a " << x_size << "x" << y_size << " alphabet has " << count
       << " joint types, above the cap of " << max_types;
    throw ResourceCapExceeded(os.str());
  }
}

void for_each_composition(int n, int k, const CountVisitor& visit) {
  if (n < 0 || k < 1) throw InvalidArgument("for_each_composition: invalid arguments");
  std::vector<int> c(static_cast<std::size_t>(k), 0);
  c[0] = n;
  do {
    visit(c);
  } while (next_composition(c));
}

void for_each_composition_chunk(int n, int k, int first, const CountVisitor& visit) {
  if (n < 0 || k < 1 || first < 0 || first > n) {
    throw InvalidArgument("for_each_composition_chunk: invalid arguments");
  }
  if (k == 1) {
    if (first == n) {
      const std::vector<int> c{n};
      visit(c);
    }
    return;
  }
  std::vector<int> c(static_cast<std::size_t>(k), 0);
  c[0] = first;
  c[1] = n - first;
  do {
    visit(c);
  } while (next_composition(c) && c[0] == first);
}

void for_each_joint_type(int n, int x_size, int y_size, const CountVisitor& visit,
                         std::uint64_t max_types) {
  if (n < 1) throw InvalidArgument("blocklength must be at least 1");
  check_type_cap(n, x_size, y_size, max_types);
  for_each_composition(n, x_size * y_size, visit);
}

JointTypeEnumerator::JointTypeEnumerator(int n, int x_size, int y_size, std::uint64_t max_types)
    : n_(n), x_size_(x_size), y_size_(y_size) {
  if (n < 1) throw InvalidArgument("blocklength must be at least 1");
  check_type_cap(n, x_size, y_size, max_types);
  counts_.assign(static_cast<std::size_t>(x_size) * static_cast<std::size_t>(y_size), 0);
  counts_[0] = n;
}

std::optional<JointType> JointTypeEnumerator::next() {
  if (done_) return std::nullopt;
  if (started_ && !next_composition(counts_)) {
    done_ = true;
    return std::nullopt;
  }
  started_ = true;
  return JointType(n_, x_size_, y_size_, counts_);
}

std::vector<JointType> enumerate_joint_types(int n, int x_size, int y_size,
                                             std::uint64_t max_types) {
  check_type_cap(n, x_size, y_size, max_types);
  std::vector<JointType> out;
  out.reserve(static_cast<std::size_t>(joint_type_count(n, x_size, y_size)));
  for_each_joint_type(
      n, x_size, y_size,
      [&](std::span<const int> c) { out.emplace_back(n, x_size, y_size, std::vector<int>(c.begin(), c.end())); },
      max_types);
  return out;
}

namespace {

void fill_cells(int x, int y, int x_size, int y_size, std::vector<int>& row_left,
                std::vector<int>& col_left, std::vector<int>& cells, const CountVisitor& visit) {
  if (x == x_size) {
    visit(cells);
    return;
  }
  const int nx = (y + 1 == y_size) ? x + 1 : x;
  const int ny = (y + 1 == y_size) ? 0 : y + 1;
  const std::size_t idx = static_cast<std::size_t>(x * y_size + y);
  // The last cell of a row and the last row are forced by the margins.
  if (y + 1 == y_size || x + 1 == x_size) {
    const int v = (y + 1 == y_size) ? row_left[x] : col_left[y];
    if (v > col_left[y] || v > row_left[x]) return;
    cells[idx] = v;
    row_left[x] -= v;
    col_left[y] -= v;
    fill_cells(nx, ny, x_size, y_size, row_left, col_left, cells, visit);
    row_left[x] += v;
    col_left[y] += v;
    return;
  }
  const int hi = std::min(row_left[x], col_left[y]);
  for (int v = hi; v >= 0; --v) {
    cells[idx] = v;
    row_left[x] -= v;
    col_left[y] -= v;
    fill_cells(nx, ny, x_size, y_size, row_left, col_left, cells, visit);
    row_left[x] += v;
    col_left[y] += v;
  }
}

}  // namespace

void for_each_joint_type_with_marginals(std::span<const int> x_counts,
                                        std::span<const int> y_counts,
                                        const CountVisitor& visit) {
  const long long sx = std::accumulate(x_counts.begin(), x_counts.end(), 0LL);
  const long long sy = std::accumulate(y_counts.begin(), y_counts.end(), 0LL);
  if (sx != sy || x_counts.empty() || y_counts.empty()) {
    throw InvalidArgument("marginal counts must be non-empty with equal totals");
  }
  std::vector<int> row_left(x_counts.begin(), x_counts.end());
  std::vector<int> col_left(y_counts.begin(), y_counts.end());
  std::vector<int> cells(x_counts.size() * y_counts.size(), 0);
  fill_cells(0, 0, static_cast<int>(x_counts.size()), static_cast<int>(y_counts.size()), row_left,
             col_left, cells, visit);
}

double log_factorial(int k) {
  if (k < 0) throw InvalidArgument("log_factorial of a negative number");
  if (k < kLogFactorialTableSize) return log_factorial_table()[static_cast<std::size_t>(k)];
  return std::lgamma(k + 1.0);
}

double log_multinomial_coefficient(std::span<const int> counts) {
  int n = 0;
  double out = 0.0;
  for (int c : counts) {
    n += c;
    out -= log_factorial(c);
  }
  return out + log_factorial(n);
}

double log_type_probability(std::span<const int> counts, const Table& log_d) {
  double out = log_multinomial_coefficient(counts);
  const Eigen::Index cols = log_d.cols();
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0) continue;
    out += counts[i] * log_d(static_cast<Eigen::Index>(i) / cols, static_cast<Eigen::Index>(i) % cols);
  }
  return out;
}

double log_type_probability(const JointType& t, const JointDistribution& d) {
  if (t.x_size() != d.x_size() || t.y_size() != d.y_size()) {
    throw InvalidArgument("log_type_probability: dimension mismatch");
  }
  return log_type_probability(t.counts(), Table(d.table().array().log()));
}

}  // namespace mhtest
