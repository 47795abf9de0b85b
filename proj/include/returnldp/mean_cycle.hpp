#pragma once

// Karp's maximum mean-cycle algorithm for integer vertex weights.
//
// The weight of an edge u -> v is weight[u]. With D_0 = 0 on every vertex
// (walks may start anywhere), D_k(v) is the largest weight of a k-edge walk
// ending at v, and the maximum cycle mean is
//   max_v min_{0 <= k < n} (D_n(v) - D_k(v)) / (n - k).
// The two-pass formulation keeps memory at O(n).

#include "returnldp/error.hpp"
#include "returnldp/symbolic.hpp"

#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace returnldp {

template <std::integral Weight>
struct CycleMean {
  Weight numerator;
  Weight denominator;  ///< positive

  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

namespace detail {

template <std::integral Weight>
void karp_step(const Digraph& g, std::span<const Weight> weight, const std::vector<std::optional<Weight>>& prev,
               std::vector<std::optional<Weight>>& next) {
  std::fill(next.begin(), next.end(), std::nullopt);
  for (std::size_t u = 0; u < g.vertex_count(); ++u) {
    if (!prev[u]) continue;
    const Weight candidate = *prev[u] + weight[u];
    for (std::uint32_t v : g.successors(u)) {
      if (!next[v] || candidate > *next[v]) next[v] = candidate;
    }
  }
}

}  // namespace detail

/// Maximum mean cycle weight; nullopt if the graph is acyclic.
template <std::integral Weight>
std::optional<CycleMean<Weight>> max_mean_cycle(const Digraph& g, std::span<const Weight> weight) {
  const std::size_t n = g.vertex_count();
  if (weight.size() != n) throw Error(ErrorKind::InvalidArgument, "one weight per vertex required");
  if (n == 0) return std::nullopt;

  using Entry = std::optional<Weight>;
  std::vector<Entry> cur(n, Weight{0}), nxt(n);
  for (std::size_t k = 0; k < n; ++k) {
    detail::karp_step(g, weight, cur, nxt);
    cur.swap(nxt);
  }
  const std::vector<Entry> dn = cur;

  // best[v] = min_k (D_n(v) - D_k(v)) / (n - k), kept as an exact fraction.
  std::vector<std::optional<CycleMean<Weight>>> best(n);
  std::fill(cur.begin(), cur.end(), Weight{0});
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!dn[v] || !cur[v]) continue;
      const CycleMean<Weight> cand{*dn[v] - *cur[v], static_cast<Weight>(n - k)};
      auto& b = best[v];
      if (!b || static_cast<long double>(cand.numerator) * b->denominator <
                    static_cast<long double>(b->numerator) * cand.denominator) {
        b = cand;
      }
    }
    detail::karp_step(g, weight, cur, nxt);
    cur.swap(nxt);
  }

  std::optional<CycleMean<Weight>> result;
  for (const auto& b : best) {
    if (!b) continue;
    if (!result || static_cast<long double>(b->numerator) * result->denominator >
                       static_cast<long double>(result->numerator) * b->denominator) {
      result = b;
    }
  }
  if (result) {
    const Weight d = std::gcd(result->numerator, result->denominator);
    if (d > 1) {
      result->numerator /= d;
      result->denominator /= d;
    }
  }
  return result;
}

/// Minimum mean cycle weight, via the maximum of the negated weights.
template <std::integral Weight>
std::optional<CycleMean<Weight>> min_mean_cycle(const Digraph& g, std::span<const Weight> weight) {
  std::vector<Weight> neg(weight.begin(), weight.end());
  for (auto& w : neg) w = -w;
  auto r = max_mean_cycle<Weight>(g, neg);
  if (r) r->numerator = -r->numerator;
  return r;
}

}  // namespace returnldp
