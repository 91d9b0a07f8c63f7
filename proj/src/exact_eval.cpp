#include "mhtest/exact_eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kSumChunk = 512;

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// log of sum exp(logs[i]) over the selected indices. Each fixed chunk is
// shifted by its own maximum; chunks are merged in order.
double selected_log_sum(const std::vector<double>& logs, const std::vector<char>& selected) {
  std::vector<std::pair<double, double>> parts;  // (shift, shifted sum)
  for (std::size_t begin = 0; begin < logs.size(); begin += kSumChunk) {
    const std::size_t end = std::min(logs.size(), begin + kSumChunk);
    double m = kNegInf;
    for (std::size_t i = begin; i < end; ++i) {
      if (selected[i]) m = std::max(m, logs[i]);
    }
    if (m == kNegInf) continue;
    Kahan k;
    for (std::size_t i = begin; i < end; ++i) {
      if (selected[i]) k.add(std::exp(logs[i] - m));
    }
    parts.emplace_back(m, k.sum);
  }
  if (parts.empty()) return kNegInf;
  double m = kNegInf;
  for (const auto& [shift, s] : parts) m = std::max(m, shift);
  Kahan k;
  for (const auto& [shift, s] : parts) k.add(s * std::exp(shift - m));
  return m + std::log(k.sum);
}

ErrorPoint make_point(double log_alpha, double log_beta) {
  ErrorPoint pt;
  pt.log_alpha = std::min(0.0, log_alpha);
  pt.log_beta = std::min(0.0, log_beta);
  pt.alpha = std::exp(pt.log_alpha);
  pt.beta = std::exp(pt.log_beta);
  return pt;
}

Hypothesis np_rule(const ProxyLLR& llr, double tau, std::span<const int> cx, std::span<const int> cy) {
  return np_like_decide(frequencies(cx), frequencies(cy), llr, tau);
}

}  // namespace

MarginalRule make_rule(const SchemeSpec& spec, LambdaPath& path,
                       const MarginalTypeTable* oracle_table) {
  validate_scheme(spec, path.e_pq(), path.e_qp());
  switch (spec.kind) {
    case SchemeKind::np_like: {
      const ProxyLLR llr = path.solve(spec.lambda).llr;
      const double tau = spec.tau;
      return [llr, tau](std::span<const int> cx, std::span<const int> cy) {
        return np_rule(llr, tau, cx, cy);
      };
    }
    case SchemeKind::hk: {
      struct Cache {
        std::mutex mutex;
        std::map<std::pair<std::vector<int>, std::vector<int>>, double> values;
      };
      auto cache = std::make_shared<Cache>();
      const JointDistribution p = path.p();
      const double r = spec.r;
      return [cache, p, r](std::span<const int> cx, std::span<const int> cy) {
        std::pair<std::vector<int>, std::vector<int>> key{{cx.begin(), cx.end()}, {cy.begin(), cy.end()}};
        double stat;
        {
          std::lock_guard<std::mutex> lock(cache->mutex);
          const auto it = cache->values.find(key);
          if (it != cache->values.end()) {
            stat = it->second;
          } else {
            stat = hk_statistic(frequencies(cx), frequencies(cy), p);
            cache->values.emplace(std::move(key), stat);
          }
        }
        return stat < r - kTieTolerance ? Hypothesis::h0 : Hypothesis::h1;
      };
    }
    case SchemeKind::oracle: {
      if (oracle_table == nullptr) throw InvalidArgument("oracle rule needs the marginal type table");
      std::map<std::pair<std::vector<int>, std::vector<int>>, double> llr;
      for (const auto& pr : oracle_table->pairs) llr[{pr.x_counts, pr.y_counts}] = pr.llr();
      const double tau = spec.tau;
      auto shared = std::make_shared<const decltype(llr)>(std::move(llr));
      return [shared, tau](std::span<const int> cx, std::span<const int> cy) {
        const auto it = shared->find({{cx.begin(), cx.end()}, {cy.begin(), cy.end()}});
        if (it == shared->end()) throw InvalidArgument("marginal types do not match the oracle blocklength");
        return it->second > tau + kTieTolerance ? Hypothesis::h0 : Hypothesis::h1;
      };
    }
  }
  throw InvalidArgument("unknown scheme");
}

ExactEvaluator::ExactEvaluator(JointDistribution p, JointDistribution q, int n,
                               std::uint64_t max_types, unsigned threads)
    : p_(std::move(p)), q_(std::move(q)), table_(marginal_type_masses(p_, q_, n, max_types, threads)) {}

ErrorPoint ExactEvaluator::evaluate(const std::vector<Hypothesis>& decisions) const {
  if (decisions.size() != table_.pairs.size()) {
    throw InvalidArgument("one decision per marginal type pair is required");
  }
  const std::size_t m = decisions.size();
  std::vector<double> lp(m), lq(m);
  std::vector<char> reject(m), accept(m);
  for (std::size_t i = 0; i < m; ++i) {
    lp[i] = table_.pairs[i].log_p;
    lq[i] = table_.pairs[i].log_q;
    reject[i] = decisions[i] == Hypothesis::h1;
    accept[i] = !reject[i];
  }
  ErrorPoint pt = make_point(selected_log_sum(lp, reject), selected_log_sum(lq, accept));
  pt.n = table_.n;
  return pt;
}

std::pair<double, double> ExactEvaluator::accept_masses(const std::vector<Hypothesis>& decisions) const {
  if (decisions.size() != table_.pairs.size()) {
    throw InvalidArgument("one decision per marginal type pair is required");
  }
  const std::size_t m = decisions.size();
  std::vector<double> lp(m), lq(m);
  std::vector<char> accept(m);
  for (std::size_t i = 0; i < m; ++i) {
    lp[i] = table_.pairs[i].log_p;
    lq[i] = table_.pairs[i].log_q;
    accept[i] = decisions[i] == Hypothesis::h0;
  }
  return {std::exp(selected_log_sum(lp, accept)), std::exp(selected_log_sum(lq, accept))};
}

ErrorPoint ExactEvaluator::evaluate(const MarginalRule& rule) const {
  std::vector<Hypothesis> d;
  d.reserve(table_.pairs.size());
  for (const auto& pr : table_.pairs) d.push_back(rule(pr.x_counts, pr.y_counts));
  return evaluate(d);
}

ErrorPoint ExactEvaluator::np_like(const ProxyLLR& llr, double lambda, double tau) const {
  ErrorPoint pt = evaluate([&](std::span<const int> cx, std::span<const int> cy) {
    return np_rule(llr, tau, cx, cy);
  });
  pt.scheme = SchemeKind::np_like;
  pt.lambda = lambda;
  pt.parameter = tau;
  return pt;
}

const std::vector<double>& ExactEvaluator::hk_statistics() const {
  std::call_once(hk_once_, [&] {
    hk_stats_.reserve(table_.pairs.size());
    for (const auto& pr : table_.pairs) {
      hk_stats_.push_back(hk_statistic(frequencies(pr.x_counts), frequencies(pr.y_counts), p_));
    }
  });
  return hk_stats_;
}

ErrorPoint ExactEvaluator::hk(double r) const {
  if (!(r > 0.0)) throw RangeError("hk: r must be positive");
  const std::vector<double>& stats = hk_statistics();
  std::vector<Hypothesis> d(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    d[i] = stats[i] < r - kTieTolerance ? Hypothesis::h0 : Hypothesis::h1;
  }
  ErrorPoint pt = evaluate(d);
  pt.scheme = SchemeKind::hk;
  pt.lambda = std::numeric_limits<double>::quiet_NaN();
  pt.parameter = r;
  return pt;
}

ErrorPoint ExactEvaluator::oracle(double tau) const {
  std::vector<Hypothesis> d;
  d.reserve(table_.pairs.size());
  for (const auto& pr : table_.pairs) {
    d.push_back(pr.llr() > tau + kTieTolerance ? Hypothesis::h0 : Hypothesis::h1);
  }
  ErrorPoint pt = evaluate(d);
  pt.scheme = SchemeKind::oracle;
  pt.lambda = std::numeric_limits<double>::quiet_NaN();
  pt.parameter = tau;
  return pt;
}

ErrorPoint exact_tradeoff(const SchemeSpec& spec, const JointDistribution& p,
                          const JointDistribution& q, int n, const ExactOptions& opts) {
  const ExactEvaluator ev(p, q, n, opts.max_types, opts.threads);
  switch (spec.kind) {
    case SchemeKind::np_like: {
      LambdaPath path(p, q, opts.solver);
      validate_scheme(spec, path.e_pq(), path.e_qp());
      return ev.np_like(path.solve(spec.lambda).llr, spec.lambda, spec.tau);
    }
    case SchemeKind::hk:
      validate_scheme(spec, 0.0, 0.0);
      return ev.hk(spec.r);
    case SchemeKind::oracle:
      validate_scheme(spec, 0.0, 0.0);
      return ev.oracle(spec.tau);
  }
  throw InvalidArgument("unknown scheme");
}

PpvMoments ppv_moments(const JointDistribution& p, const JointDistribution& q) {
  const ProjectionResult star = project_onto_marginals(q, p.marginal_x(), p.marginal_y());
  const Table& ps = star.projection.table();
  const Table j = ps.array().log() - q.table().array().log();
  const double mean = expectation(ps, j);
  const Table dev = (j.array() - mean).matrix();
  PpvMoments m;
  m.sigma = std::sqrt(expectation(ps, dev.array().square().matrix()));
  m.t3 = expectation(ps, dev.array().abs().cube().matrix());
  return m;
}

double ppv_beta_bound(const JointDistribution& p, const JointDistribution& q, int n, double tau) {
  if (n < 1) throw InvalidArgument("ppv_beta_bound: n must be positive");
  const PpvMoments m = ppv_moments(p, q);
  if (!(m.sigma > 1e-12)) {
    throw RangeError("ppv_beta_bound: the density is constant under P*, so the bound is undefined");
  }
  const double sigma2 = m.sigma * m.sigma;
  const double lead = 2.0 * (std::numbers::ln2 / std::sqrt(2.0 * std::numbers::pi) + 12.0 * m.t3 / sigma2);
  return lead * std::exp(-tau * n) / (m.sigma * std::sqrt(static_cast<double>(n)));
}

}  // namespace mhtest
