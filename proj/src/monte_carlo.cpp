#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "mhtest/errors.hpp"
#include "mhtest/exact_eval.hpp"

namespace mhtest {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kTrialsPerBlock = 4096;

struct Sampler {
  std::vector<double> cdf;  // row-major cumulative masses
  int y_size;

  explicit Sampler(const JointDistribution& d) : y_size(d.y_size()) {
    double acc = 0.0;
    for (int x = 0; x < d.x_size(); ++x) {
      for (int y = 0; y < d.y_size(); ++y) {
        acc += d(x, y);
        cdf.push_back(acc);
      }
    }
    cdf.back() = 1.0;
  }

  int cell(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  }
};

// Number of trials in [begin, end) whose decision is the error event for the side.
std::uint64_t count_errors(const MarginalRule& rule, const Sampler& s, int xs, int ys, int n,
                           std::uint64_t seed, std::uint64_t side, std::uint64_t begin,
                           std::uint64_t end) {
  std::vector<int> cx(static_cast<std::size_t>(xs)), cy(static_cast<std::size_t>(ys));
  std::uint64_t errors = 0;
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    std::fill(cx.begin(), cx.end(), 0);
    std::fill(cy.begin(), cy.end(), 0);
    CounterRng rng(seed, trial, side);
    for (int i = 0; i < n; ++i) {
      const int c = s.cell(rng.next_uniform());
      ++cx[static_cast<std::size_t>(c / ys)];
      ++cy[static_cast<std::size_t>(c % ys)];
    }
    const Hypothesis h = rule(cx, cy);
    // Side 0 samples from P (error: H1), side 1 from Q (error: H0).
    if ((side == 0 && h == Hypothesis::h1) || (side == 1 && h == Hypothesis::h0)) ++errors;
  }
  return errors;
}

double half_width(double p, std::uint64_t trials) {
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trial, std::uint64_t side)
    : base_(mix(seed + mix(2 * trial + side + 1))) {}

std::uint64_t CounterRng::next_u64() { return mix(base_ + (++counter_) * kGolden); }

double CounterRng::next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

McEstimate monte_carlo_tradeoff(const MarginalRule& rule, const JointDistribution& p,
                                const JointDistribution& q, int n, std::uint64_t trials,
                                std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw InvalidArgument("monte carlo: trials must be at least 1");
  if (n < 1) throw InvalidArgument("monte carlo: blocklength must be at least 1");
  if (p.x_size() != q.x_size() || p.y_size() != q.y_size()) {
    throw InvalidArgument("P and Q must share the alphabet");
  }
  const Sampler sp(p), sq(q);
  const int xs = p.x_size(), ys = p.y_size();
  const std::uint64_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  // Error counts per (block, side); integer sums make the total independent
  // of scheduling.
  std::vector<std::uint64_t> counts(2 * blocks, 0);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::uint64_t b = next++; b < blocks; b = next++) {
      try {
        const std::uint64_t begin = b * kTrialsPerBlock;
        const std::uint64_t end = std::min(trials, begin + kTrialsPerBlock);
        counts[2 * b] = count_errors(rule, sp, xs, ys, n, seed, 0, begin, end);
        counts[2 * b + 1] = count_errors(rule, sq, xs, ys, n, seed, 1, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, blocks));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::uint64_t alpha_errors = 0, beta_errors = 0;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    alpha_errors += counts[2 * b];
    beta_errors += counts[2 * b + 1];
  }
  McEstimate est;
  est.trials = trials;
  est.seed = seed;
  est.n = n;
  est.alpha_hat = static_cast<double>(alpha_errors) / static_cast<double>(trials);
  est.beta_hat = static_cast<double>(beta_errors) / static_cast<double>(trials);
  est.half_width_alpha = half_width(est.alpha_hat, trials);
  est.half_width_beta = half_width(est.beta_hat, trials);
  est.half_width_95 = std::max(est.half_width_alpha, est.half_width_beta);
  return est;
}

McEstimate monte_carlo_tradeoff(const SchemeSpec& spec, const JointDistribution& p,
                                const JointDistribution& q, int n, std::uint64_t trials,
                                std::uint64_t seed, const ExactOptions& opts) {
  LambdaPath path(p, q, opts.solver);
  std::unique_ptr<MarginalTypeTable> table;
  if (spec.kind == SchemeKind::oracle) {
    table = std::make_unique<MarginalTypeTable>(marginal_type_masses(p, q, n, opts.max_types, opts.threads));
  }
  const MarginalRule rule = make_rule(spec, path, table.get());
  McEstimate est = monte_carlo_tradeoff(rule, p, q, n, trials, seed, opts.threads);
  est.scheme = spec.kind;
  est.lambda = spec.kind == SchemeKind::np_like ? spec.lambda : std::numeric_limits<double>::quiet_NaN();
  est.parameter = spec.parameter();
  return est;
}

}  // namespace mhtest
