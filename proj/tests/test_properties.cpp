// Randomized properties over small primitive systems, checked against the
// brute-force references in oracles.hpp.

#include "oracles.hpp"

#include "returnldp/deviations.hpp"
#include "returnldp/rng.hpp"
#include "returnldp/verify.hpp"

#include <doctest.h>

using namespace returnldp;

namespace {

struct RandomCase {
  Sft sft;
  LocalPotential phi;
  CylinderUnion R;
  std::vector<std::vector<int>> r_words;
  std::map<std::vector<int>, double> table;
};

std::optional<RandomCase> random_case(std::uint64_t seed) {
  CounterRng rng(seed, 0);
  const int N = 2 + static_cast<int>(rng.below(2));
  BoolMatrix t(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) t(i, j) = rng.uniform() < 0.7;
  }
  Sft sft = Sft::full_shift(N);
  try {
    sft = validate_sft(t);
  } catch (const Error&) {
    return std::nullopt;
  }
  std::map<Word, double> values;
  std::map<std::vector<int>, double> table;
  for (const auto& w : oracle::words(sft, 2)) {
    const double v = 2.0 * rng.uniform() - 1.0;
    values[oracle::to_word(w)] = v;
    table[w] = v;
  }
  const LocalPotential phi(sft, 2, values);
  std::vector<Word> rw;
  std::vector<std::vector<int>> riw;
  for (const auto& w : oracle::words(sft, 2)) {
    if (rng.uniform() < 0.35) {
      rw.push_back(oracle::to_word(w));
      riw.push_back(w);
    }
  }
  if (rw.empty()) return std::nullopt;
  CylinderUnion R(sft, 2, rw);
  if (R.complement(sft).empty()) return std::nullopt;
  return RandomCase{sft, phi, R, riw, table};
}

}  // namespace

TEST_CASE("random systems: pressure, extrema, CGF and DP invariants") {
  int tested = 0;
  for (std::uint64_t seed = 1; tested < 25 && seed < 400; ++seed) {
    const auto c = random_case(seed);
    if (!c) continue;
    ++tested;
    CAPTURE(seed);
    const BlockSft b = recode(c->sft, 2);
    const auto& table = c->table;

    const double ref = oracle::dense_log_radius(
        oracle::dense_transfer(c->sft, 2, [&](const std::vector<int>& w) { return table.at(w); }));
    CHECK(std::abs(pressure(b, c->phi) - ref) < 1e-10);

    const ErgodicExtrema ext = max_min_measure(b, c->R);
    const auto [hi, lo] = oracle::periodic_extremes(c->sft, c->r_words, static_cast<int>(b.state_count()));
    CHECK(ext.max.numerator * hi.den == hi.num * ext.max.denominator);
    CHECK(ext.min.numerator * lo.den == lo.num * ext.min.denominator);

    const CgfSolver psi(b, c->phi, c->R);
    const DeviationDomain& d = psi.domain();
    CHECK(psi(0.0) == 0.0);
    const double h = 1e-4;
    CHECK(std::abs((psi(h) - psi(-h)) / (2 * h) - 1.0 / d.measure) < 1e-4 / d.measure);
    std::vector<double> grid = linspace(-3.0, d.alpha_max.is_finite() ? 0.9 * d.alpha_max.value() : 2.0, 25);
    const CgfCurve curve = cgf_curve(psi, grid);
    CHECK(curve.invariant_violations().empty());
    CHECK(std::abs(psi(-39.0) - psi(-40.0) - d.inv_max.value()) < 1e-4);

    const GibbsMarkovMeasure mu = gibbs_measure(b, c->phi);
    CHECK(std::abs(measure_of(mu, c->R) - d.measure) < 1e-12);
    for (int n : {1, 4}) {
      const ReturnTimeDistribution dist = return_distribution(mu, c->R, n, 200);
      CHECK(dist.mass_defect() < 1e-12);
      for (double a : {-1.0, 0.5 * grid.back()}) {
        const EmpiricalCgf e = empirical_cgf_auto(mu, c->R, n, a);
        CHECK(std::abs(e.value - exact_mgf_rate(mu, c->R, n, a)) <= e.truncation_bound + 1e-10);
      }
    }
    const double lam = induced_eigenvalue(b, c->phi, c->R, d.pressure_top + 0.5, 400);
    CHECK(std::abs(std::log(lam) - psi(-0.5)) < 1e-6);
  }
  CHECK(tested >= 20);
}
