#include "mhtest/schemes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "mhtest/errors.hpp"

namespace mhtest {

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_frequencies(const Vector& t, Eigen::Index size, const char* name) {
  if (t.size() != size) {
    std::ostringstream os;
    os << "type over " << name << " has length " << t.size() << ", expected " << size;
    throw InvalidArgument(os.str());
  }
}

std::vector<std::vector<int>> all_compositions(int n, int k) {
  std::vector<std::vector<int>> out;
  for_each_composition(n, k, [&](std::span<const int> c) { out.emplace_back(c.begin(), c.end()); });
  return out;
}

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::np_like: return "np_like";
    case SchemeKind::hk: return "hk";
    case SchemeKind::oracle: return "oracle";
  }
  return "unknown";
}

std::string to_string(Hypothesis h) { return h == Hypothesis::h0 ? "H0" : "H1"; }

SchemeSpec SchemeSpec::np_like(double lambda, double tau) {
  return SchemeSpec{SchemeKind::np_like, lambda, tau, 0.0};
}
SchemeSpec SchemeSpec::np_like(double tau) { return np_like(tau, tau); }
SchemeSpec SchemeSpec::hk(double r) { return SchemeSpec{SchemeKind::hk, 0.0, 0.0, r}; }
SchemeSpec SchemeSpec::oracle(double tau) { return SchemeSpec{SchemeKind::oracle, 0.0, tau, 0.0}; }

double SchemeSpec::parameter() const { return kind == SchemeKind::hk ? r : tau; }

void validate_scheme(const SchemeSpec& spec, double e_pq, double e_qp) {
  std::ostringstream os;
  switch (spec.kind) {
    case SchemeKind::np_like:
      if (!(spec.lambda >= -e_qp - 1e-14 && spec.lambda <= e_pq + 1e-14)) {
        os << "lambda = " << spec.lambda << " lies outside [" << -e_qp << ", " << e_pq << "]";
        throw RangeError(os.str());
      }
      if (!std::isfinite(spec.tau)) throw RangeError("tau must be finite");
      break;
    case SchemeKind::hk:
      if (!(spec.r > 0.0) || !std::isfinite(spec.r)) {
        os << "r = " << spec.r << " must be positive";
        throw RangeError(os.str());
      }
      break;
    case SchemeKind::oracle:
      if (!std::isfinite(spec.tau)) throw RangeError("tau must be finite");
      break;
  }
}

Vector frequencies(std::span<const int> counts) {
  const int n = std::accumulate(counts.begin(), counts.end(), 0);
  if (n <= 0) throw InvalidArgument("type counts must have a positive total");
  Vector out(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = static_cast<double>(counts[i]) / n;
  }
  return out;
}

double np_like_statistic(const Vector& tx, const Vector& ty, const ProxyLLR& llr) {
  check_frequencies(tx, llr.a1.size(), "X");
  check_frequencies(ty, llr.a2.size(), "Y");
  return llr.statistic(tx, ty);
}

Hypothesis np_like_decide(const Vector& tx, const Vector& ty, const ProxyLLR& llr, double tau) {
  return np_like_statistic(tx, ty, llr) > tau + kTieTolerance ? Hypothesis::h0 : Hypothesis::h1;
}

double np_like_statistic(const JointType& t, const ProxyLLR& llr) {
  if (t.x_size() != llr.table.rows() || t.y_size() != llr.table.cols()) {
    throw InvalidArgument("joint type does not match the statistic table");
  }
  double s = 0.0;
  for (int x = 0; x < t.x_size(); ++x) {
    for (int y = 0; y < t.y_size(); ++y) s += t.count(x, y) * llr.table(x, y);
  }
  return s / t.n();
}

double hk_statistic(const Vector& tx, const Vector& ty, const JointDistribution& p,
                    const ProjectionOptions& opts) {
  check_frequencies(tx, p.x_size(), "X");
  check_frequencies(ty, p.y_size(), "Y");
  return projected_divergence_to_marginals(p, tx, ty, opts);
}

Hypothesis hk_decide(const Vector& tx, const Vector& ty, const JointDistribution& p, double r,
                     const ProjectionOptions& opts) {
  if (!(r > 0.0)) throw RangeError("hk_decide: r must be positive");
  return hk_statistic(tx, ty, p, opts) < r - kTieTolerance ? Hypothesis::h0 : Hypothesis::h1;
}

MarginalTypeTable marginal_type_masses(const JointDistribution& p, const JointDistribution& q,
                                       int n, std::uint64_t max_types, unsigned threads) {
  if (p.x_size() != q.x_size() || p.y_size() != q.y_size()) {
    throw InvalidArgument("P and Q must share the alphabet");
  }
  if (n < 1) throw InvalidArgument("blocklength must be at least 1");
  const int xs = p.x_size();
  const int ys = p.y_size();
  const int cells = xs * ys;
  check_type_cap(n, xs, ys, max_types);

  MarginalTypeTable table;
  table.n = n;
  table.x_types = all_compositions(n, xs);
  table.y_types = all_compositions(n, ys);
  std::map<std::vector<int>, int> x_index, y_index;
  for (std::size_t i = 0; i < table.x_types.size(); ++i) x_index[table.x_types[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < table.y_types.size(); ++i) y_index[table.y_types[i]] = static_cast<int>(i);
  const std::size_t ny = table.y_types.size();

  const Table log_p = p.table().array().log();
  const Table log_q = q.table().array().log();

  struct Entry {
    std::size_t pair;
    double lp;
    double lq;
  };
  // Chunk c holds the joint types whose first cell count is n - c.
  std::vector<std::vector<Entry>> chunks(static_cast<std::size_t>(n) + 1);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    std::vector<int> cx(static_cast<std::size_t>(xs)), cy(static_cast<std::size_t>(ys));
    for (int c = next++; c <= n; c = next++) {
      try {
        auto& out = chunks[static_cast<std::size_t>(c)];
        for_each_composition_chunk(n, cells, n - c, [&](std::span<const int> counts) {
          std::fill(cx.begin(), cx.end(), 0);
          std::fill(cy.begin(), cy.end(), 0);
          for (int x = 0; x < xs; ++x) {
            for (int y = 0; y < ys; ++y) {
              const int v = counts[static_cast<std::size_t>(x * ys + y)];
              cx[static_cast<std::size_t>(x)] += v;
              cy[static_cast<std::size_t>(y)] += v;
            }
          }
          const std::size_t pair =
              static_cast<std::size_t>(x_index.at(cx)) * ny + static_cast<std::size_t>(y_index.at(cy));
          out.push_back({pair, log_type_probability(counts, log_p), log_type_probability(counts, log_q)});
        });
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n) + 1);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  table.pairs.resize(table.x_types.size() * ny);
  for (std::size_t ix = 0; ix < table.x_types.size(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      auto& pr = table.pairs[ix * ny + iy];
      pr.x_counts = table.x_types[ix];
      pr.y_counts = table.y_types[iy];
      pr.log_p = kNegInf;
      pr.log_q = kNegInf;
    }
  }
  for (const auto& chunk : chunks) {
    for (const Entry& e : chunk) {
      auto& pr = table.pairs[e.pair];
      pr.log_p = log_add(pr.log_p, e.lp);
      pr.log_q = log_add(pr.log_q, e.lq);
    }
  }
  return table;
}

std::vector<MarginalTypePair> oracle_marginal_type_llr(const JointDistribution& p,
                                                       const JointDistribution& q, int n,
                                                       std::uint64_t max_types, int max_n) {
  if (n > max_n) {
    std::ostringstream os;
    os << "oracle enumeration at n = " << n << " exceeds the limit n <= " << max_n;
    throw ResourceCapExceeded(os.str());
  }
  return marginal_type_masses(p, q, n, max_types).pairs;
}

std::vector<ErrorPoint> oracle_tradeoff(const MarginalTypeTable& table) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> order(table.pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.pairs[a].llr() < table.pairs[b].llr();
  });

  // Group ratios that tie within the tolerance.
  std::vector<std::size_t> group_end;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const bool last = i + 1 == order.size();
    if (last || table.pairs[order[i + 1]].llr() - table.pairs[order[i]].llr() > kTieTolerance) {
      group_end.push_back(i + 1);
    }
  }
  const std::size_t groups = group_end.size();

  // log_alpha[g]: P-mass of the first g groups (rejected).
  // log_beta[g]:  Q-mass of the remaining groups (accepted).
  std::vector<double> log_alpha(groups + 1, kNegInf), log_beta(groups + 1, kNegInf);
  std::size_t start = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    double acc = log_alpha[g];
    for (std::size_t i = start; i < group_end[g]; ++i) acc = log_add(acc, table.pairs[order[i]].log_p);
    log_alpha[g + 1] = acc;
    start = group_end[g];
  }
  std::size_t end = order.size();
  for (std::size_t g = groups; g-- > 0;) {
    const std::size_t begin = g == 0 ? 0 : group_end[g - 1];
    double acc = log_beta[g + 1];
    for (std::size_t i = begin; i < end; ++i) acc = log_add(acc, table.pairs[order[i]].log_q);
    log_beta[g] = acc;
    end = begin;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double lowest = order.empty() ? 0.0 : table.pairs[order.front()].llr();
  std::vector<ErrorPoint> out;
  out.reserve(groups + 1);
  for (std::size_t g = 0; g <= groups; ++g) {
    ErrorPoint pt;
    pt.log_alpha = std::min(0.0, log_alpha[g]);
    pt.log_beta = std::min(0.0, log_beta[g]);
    pt.alpha = std::exp(pt.log_alpha);
    pt.beta = std::exp(pt.log_beta);
    pt.scheme = SchemeKind::oracle;
    pt.lambda = nan;
    // H0 iff ratio > parameter; the first point accepts everything.
    pt.parameter = g == 0 ? lowest - 1.0 : table.pairs[order[group_end[g - 1] - 1]].llr();
    pt.n = table.n;
    out.push_back(pt);
  }
  return out;
}

std::vector<ErrorPoint> oracle_tradeoff(const JointDistribution& p, const JointDistribution& q,
                                        int n, std::uint64_t max_types, int max_n) {
  if (n > max_n) {
    std::ostringstream os;
    os << "oracle enumeration at n = " << n << " exceeds the limit n <= " << max_n;
    throw ResourceCapExceeded(os.str());
  }
  return oracle_tradeoff(marginal_type_masses(p, q, n, max_types));
}

double envelope_beta(const std::vector<ErrorPoint>& envelope, double alpha) {
  if (envelope.empty()) throw InvalidArgument("envelope_beta: empty envelope");
  if (alpha <= envelope.front().alpha) return envelope.front().beta;
  for (std::size_t i = 1; i < envelope.size(); ++i) {
    const ErrorPoint& a = envelope[i - 1];
    const ErrorPoint& b = envelope[i];
    if (alpha <= b.alpha) {
      if (b.alpha == a.alpha) return std::min(a.beta, b.beta);
      const double w = (alpha - a.alpha) / (b.alpha - a.alpha);
      return a.beta + w * (b.beta - a.beta);
    }
  }
  return envelope.back().beta;
}

bool envelope_dominates(const std::vector<ErrorPoint>& envelope, const ErrorPoint& point,
                        double slack) {
  return envelope_beta(envelope, point.alpha) <= point.beta + slack;
}

}  // namespace mhtest
