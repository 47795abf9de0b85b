#include "oracles.hpp"

#include "returnldp/deviations.hpp"

#include <doctest.h>

using namespace returnldp;

namespace {

struct Example {
  Sft sft;
  BlockSft block;
  LocalPotential phi;
  CylinderUnion R;
};

Example bernoulli() {
  const Sft s = Sft::full_shift(2);
  return {s, recode(s, 1), LocalPotential::zero(s), CylinderUnion(s, 1, {Word::parse("0")})};
}

Example golden() {
  const Sft s = Sft::golden_mean();
  return {s, recode(s, 1), LocalPotential::zero(s), CylinderUnion(s, 1, {Word::parse("0")})};
}

}  // namespace

TEST_CASE("CGF closed form on the full 2-shift") {
  const Example e = bernoulli();
  const CgfSolver psi(e.block, e.phi, e.R);
  for (double a : {-2.0, -1.0, -0.5, 0.0, 0.2, 0.4, 0.6}) {
    CAPTURE(a);
    CHECK(std::abs(psi(a) - oracle::uniform_symbol_cgf(2, 1, a)) < 1e-9);
  }
  CHECK(std::abs(psi.domain().alpha_max.value() - std::log(2.0)) < 1e-9);
  CHECK(std::abs(psi.domain().s_critical.value()) < 1e-12);
  CHECK_THROWS_AS(psi(std::log(2.0)), Error);
  CHECK_THROWS_AS(psi(1.0), Error);
}

TEST_CASE("CGF closed form for k of N symbols") {
  const Sft s = Sft::full_shift(3);
  const CylinderUnion R(s, 1, {Word::parse("0"), Word::parse("2")});
  const CgfSolver psi(recode(s, 1), LocalPotential::zero(s), R);
  for (double a : {-3.0, -0.7, 0.3, 0.9}) CHECK(std::abs(psi(a) - oracle::uniform_symbol_cgf(3, 2, a)) < 1e-9);
  CHECK(psi.domain().alpha_max.value() == doctest::Approx(std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("CGF closed form on the golden mean shift") {
  const Example e = golden();
  const CgfSolver psi(e.block, e.phi, e.R);
  CHECK(psi.domain().alpha_max.is_pos_infinity());
  for (double a : {-5.0, -1.0, 0.3, 1.0, 3.0}) CHECK(std::abs(psi(a) - oracle::golden_cgf(a)) < 1e-9);
}

TEST_CASE("domain data") {
  const DeviationDomain d = deviation_domain(golden().block, golden().phi, golden().R);
  const double g = oracle::golden_ratio;
  CHECK(d.measure == doctest::Approx(g * g / (1 + g * g)).epsilon(1e-12));
  CHECK(d.inv_max.value() == 1.0);
  CHECK(d.inv_min.value() == 2.0);
  const DeviationDomain b = deviation_domain(bernoulli().block, bernoulli().phi, bernoulli().R);
  CHECK(b.inv_min.is_pos_infinity());
}

TEST_CASE("Kac derivative and asymptotic slope") {
  for (const Example& e : {bernoulli(), golden()}) {
    const CgfSolver psi(e.block, e.phi, e.R);
    const double h = 1e-4;
    CHECK(std::abs((psi(h) - psi(-h)) / (2 * h) - 1.0 / psi.domain().measure) < 1e-5);
    CHECK(std::abs(psi(-39.0) - psi(-40.0) - psi.domain().inv_max.value()) < 1e-4);
  }
}

TEST_CASE("induced operator duality") {
  for (const Example& e : {bernoulli(), golden()}) {
    const CgfSolver psi(e.block, e.phi, e.R);
    for (double a : {-1.0, 0.0, 0.3}) {
      const double lam = induced_eigenvalue(e.block, e.phi, e.R, psi.domain().pressure_top - a, 64);
      CHECK(std::abs(std::exp(psi(a)) - lam) < 1e-6);
    }
  }
  // Below the critical value the induced series diverges.
  const Example b = bernoulli();
  CHECK_THROWS_AS(induced_eigenvalue(b.block, b.phi, b.R, -0.1, 64), Error);
}

TEST_CASE("CGF curve invariants and domain margin") {
  const Example e = bernoulli();
  const CgfCurve c = cgf_curve(e.block, e.phi, e.R, linspace(-3.0, 0.6, 37));
  CHECK(c.invariant_violations().empty());
  CHECK(std::find(c.alphas.begin(), c.alphas.end(), 0.0) != c.alphas.end());
  CHECK_THROWS_AS(cgf_curve(e.block, e.phi, e.R, {0.6929}), Error);
  CHECK_THROWS_AS(cgf_curve(e.block, e.phi, e.R, {-41.0}), Error);
  // alpha_lo is inclusive.
  CHECK_NOTHROW(cgf_curve(e.block, e.phi, e.R, {-40.0}));
}

TEST_CASE("Legendre transform on the full 2-shift") {
  const Example e = bernoulli();
  CgfCurve c = cgf_curve(e.block, e.phi, e.R, linspace(-40.0, std::log(2.0) * 0.998, 601));
  const std::vector<double> us = {0.5, 0.99, 1.0, 1.5, 2.0, 3.0, 4.0, 8.0};
  const RateCurve r = legendre_transform(c, us);
  CHECK(r.invariant_violations().empty());
  CHECK(r.values[0].is_neg_infinity());
  CHECK(r.values[1].is_neg_infinity());
  CHECK(std::abs(r.values[2].value() + std::log(2.0)) < 1e-6);
  CHECK(std::abs(r.values[4].value()) < 1e-6);
  // Phi(u) = sup over geometric tilts: closed form for iid Geometric(1/2).
  for (std::size_t i = 3; i < us.size(); ++i) {
    const double u = us[i];
    // Relative entropy of Geometric(1/u) from Geometric(1/2), per return.
    const double p = 1.0 / u;
    const double ref = -(std::log(p / 0.5) + (u - 1.0) * std::log((1.0 - p) / 0.5));
    CAPTURE(u);
    CHECK(std::abs(r.values[i].value() - ref) < 1e-5);
  }
  CHECK(interpolate(r, 2.0).value() == doctest::Approx(r.values[4].value()));
  CHECK(interpolate(r, 0.2).is_neg_infinity());
}

TEST_CASE("complement formula") {
  const Example e = bernoulli();
  const CgfCurve c = cgf_curve(e.block, e.phi, e.R, linspace(-40.0, std::log(2.0) * 0.998, 601));
  const std::vector<double> us = {2.5, 3.0, 4.0};
  const RateCurve direct = legendre_transform(c, us);
  // {"0"} is symmetric with its complement, so the complement's rate curve is the same curve.
  const RateCurve own = legendre_transform(c, linspace(1.001, 12.0, 3000));
  const RateCurve via = complement_rate(own, us);
  for (std::size_t i = 0; i < us.size(); ++i) CHECK(std::abs(direct.values[i].value() - via.values[i].value()) < 1e-3);
}
