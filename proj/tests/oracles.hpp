#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's numerical code paths: systems are enumerated directly,
// spectral data comes from a dense Eigen eigensolver and return-time laws
// from exhaustive word enumeration or closed forms.

#include "returnldp/symbolic.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

namespace oracle {

using returnldp::Sft;
using returnldp::Word;

inline const double golden_ratio = 0.5 * (1.0 + std::sqrt(5.0));

/// -log(N e^{-a} - (N - k)) + log k for k of N equally likely symbols.
inline double uniform_symbol_cgf(int N, int k, double alpha) {
  return -std::log((N * std::exp(-alpha) - (N - k)) / static_cast<double>(k));
}

/// Golden-mean Parry measure, R = {"0"}: returns are 1 step w.p. 1/phi and 2 steps w.p. 1/phi^2.
inline double golden_cgf(double alpha) {
  const double g = golden_ratio;
  return std::log(std::exp(alpha) / g + std::exp(2.0 * alpha) / (g * g));
}

/// Words of the given length over the alphabet whose consecutive symbols obey the transition matrix.
inline std::vector<std::vector<int>> words(const Sft& sft, int length) {
  std::vector<std::vector<int>> out;
  std::vector<int> w(static_cast<std::size_t>(length));
  const int N = sft.alphabet_size();
  std::function<void(int)> rec = [&](int pos) {
    if (pos == length) {
      out.push_back(w);
      return;
    }
    for (int s = 0; s < N; ++s) {
      if (pos > 0 && !sft.transitions()(w[pos - 1], s)) continue;
      w[static_cast<std::size_t>(pos)] = s;
      rec(pos + 1);
    }
  };
  rec(0);
  return out;
}

inline Word to_word(const std::vector<int>& v) {
  std::vector<returnldp::Symbol> s(v.begin(), v.end());
  return Word(std::move(s));
}

/// Dense weighted transfer matrix on L-blocks built by enumeration; weight of
/// the edge u -> v is exp(phi(u)) where phi takes the L-block u.
inline Eigen::MatrixXd dense_transfer(const Sft& sft, int L, const std::function<double(const std::vector<int>&)>& phi) {
  const auto states = words(sft, L);
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& u = states[static_cast<std::size_t>(i)];
      const auto& v = states[static_cast<std::size_t>(j)];
      if (!std::equal(u.begin() + 1, u.end(), v.begin())) continue;
      if (!sft.transitions()(u.back(), v.back())) continue;
      m(i, j) = std::exp(phi(u));
    }
  }
  return m;
}

inline double dense_log_radius(const Eigen::MatrixXd& m) {
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues();
  double rho = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev(i)));
  return std::log(rho);
}

/// Extremes of the visit frequency of the cylinders (given as integer words)
/// over periodic orbits of period at most max_period, as exact fractions.
struct Fraction {
  long num;
  long den;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline std::pair<Fraction, Fraction> periodic_extremes(const Sft& sft, const std::vector<std::vector<int>>& cylinders,
                                                       int max_period) {
  Fraction hi{0, 1}, lo{1, 1};
  for (int p = 1; p <= max_period; ++p) {
    for (const auto& w : words(sft, p)) {
      if (!sft.transitions()(w.back(), w.front())) continue;
      long hits = 0;
      for (int i = 0; i < p; ++i) {
        for (const auto& c : cylinders) {
          bool match = true;
          for (std::size_t k = 0; k < c.size() && match; ++k) {
            match = w[(static_cast<std::size_t>(i) + k) % static_cast<std::size_t>(p)] == c[k];
          }
          if (match) {
            ++hits;
            break;
          }
        }
      }
      if (hits * hi.den > hi.num * p) hi = {hits, p};
      if (hits * lo.den < lo.num * p) lo = {hits, p};
    }
  }
  const long gh = std::gcd(hi.num, hi.den), gl = std::gcd(lo.num, lo.den);
  return {{hi.num / gh, hi.den / gh}, {lo.num / gl, lo.den / gl}};
}

/// log P(Bin(k, 1/2) >= n), summed in log space.
inline double log_binomial_half_at_least(int k, int n) {
  if (n <= 0) return 0.0;
  if (n > k) return -INFINITY;
  double m = -INFINITY;
  std::vector<double> terms;
  for (int j = n; j <= k; ++j) {
    const double t = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) - k * std::log(2.0);
    terms.push_back(t);
    m = std::max(m, t);
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

/// Bernoulli(1/2), R = {"0"}, full-space start: r^n is a sum of n independent
/// Geometric(1/2) variables, so P(r^n <= k) = P(Bin(k, 1/2) >= n).
inline double bernoulli_log_tail_at_least(int n, long k) {
  // P(r^n >= k) = P(r^n > k-1) = P(Bin(k-1, 1/2) <= n-1) = P(Bin(k-1, 1/2) >= k-n) by symmetry.
  return log_binomial_half_at_least(static_cast<int>(k - 1), static_cast<int>(k - n));
}

inline double bernoulli_log_tail_at_most(int n, long k) { return log_binomial_half_at_least(static_cast<int>(k), n); }

/// Law of r^n under a stationary Markov chain with kernel P and stationary pi
/// on the alphabet, R = set of symbols, by enumerating all paths of length T+1
/// (x_0 .. x_T). Entry t is P(r^n = t) for 1 <= t <= T.
inline std::vector<double> enumerated_return_law(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi,
                                                 const std::vector<int>& R, int n, int T) {
  std::vector<double> law(static_cast<std::size_t>(T + 1), 0.0);
  const auto N = static_cast<int>(pi.size());
  std::vector<int> path(static_cast<std::size_t>(T + 1));
  std::function<void(int, double, int)> rec = [&](int pos, double prob, int returns) {
    if (prob == 0.0) return;
    if (pos > 0) {
      const bool in_r = std::find(R.begin(), R.end(), path[static_cast<std::size_t>(pos)]) != R.end();
      if (in_r && ++returns == n) {
        law[static_cast<std::size_t>(pos)] += prob;
        return;
      }
    }
    if (pos == T) return;
    for (int s = 0; s < N; ++s) {
      path[static_cast<std::size_t>(pos + 1)] = s;
      rec(pos + 1, prob * P(path[static_cast<std::size_t>(pos)], s), returns);
    }
  };
  for (int s = 0; s < N; ++s) {
    path[0] = s;
    rec(0, pi(s), 0);
  }
  return law;
}

/// Golden-mean Parry chain on symbols {0, 1} (transition 1 -> 1 forbidden).
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> golden_parry_chain() {
  const double g = golden_ratio;
  Eigen::MatrixXd P(2, 2);
  P << 1.0 / g, 1.0 / (g * g), 1.0, 0.0;
  Eigen::VectorXd pi(2);
  pi << g * g / (1.0 + g * g), 1.0 / (1.0 + g * g);
  return {P, pi};
}

}  // namespace oracle
