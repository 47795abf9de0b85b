#include "returnldp/borel.hpp"
#include "returnldp/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

using namespace returnldp;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

Word bits(unsigned long value, int length) {
  std::vector<Symbol> s(static_cast<std::size_t>(length));
  for (int i = length - 1; i >= 0; --i, value >>= 1) s[static_cast<std::size_t>(i)] = value & 1;
  return Word(s);
}

}  // namespace

TEST_CASE("n-ary thresholds") {
  const NaryThreshold t = NaryThreshold::sqrt_rational(2, 1, 2);
  CHECK(t.depth() == 64);
  CHECK(std::abs(t.approx() - std::sqrt(0.5)) < 1e-15);
  // 1/sqrt(2) = 0.10110101000001001111... in binary.
  const std::vector<int> head = {1, 0, 1, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 1};
  CHECK(std::equal(head.begin(), head.end(), t.digits().begin()));
  CHECK(NaryThreshold::sqrt_rational(10, 2, 9, 20).approx() == doctest::Approx(std::sqrt(2.0) / 3).epsilon(1e-15));
  CHECK(NaryThreshold::sqrt_rational(2, 2, 4).approx() == doctest::Approx(std::sqrt(0.5)));

  CHECK(kind_of([] { NaryThreshold::sqrt_rational(2, 1, 4); }) == ErrorKind::NotIrrational);
  CHECK(kind_of([] { NaryThreshold::sqrt_rational(2, 4, 9); }) == ErrorKind::NotIrrational);
  CHECK(kind_of([] { NaryThreshold::parse("0.5", 2); }) == ErrorKind::NotIrrational);
  CHECK(kind_of([] { NaryThreshold::parse("digits:0101010101010101", 2); }) == ErrorKind::NotIrrational);
  CHECK(kind_of([] { NaryThreshold::parse("digits:1000000000000000", 2); }) == ErrorKind::NotIrrational);
  CHECK(kind_of([] { NaryThreshold::parse("digits:0110", 2); }) == ErrorKind::NotIrrational);
  const NaryThreshold d = NaryThreshold::parse("digits:0110100110010110", 2);
  CHECK_FALSE(d.warning().empty());
  CHECK(NaryThreshold::parse("0", 2).is_zero());
  CHECK(NaryThreshold::parse("1", 3).is_one());
}

TEST_CASE("interval oracle classification") {
  const IntervalOracle o(NaryThreshold::zero(2), NaryThreshold::sqrt_rational(2, 1, 2));
  CHECK(o.classify(Word::parse("0")) == Placement::inside);
  CHECK(o.classify(Word::parse("1")) == Placement::straddles);
  CHECK(o.classify(Word::parse("11")) == Placement::outside);
  CHECK(o.classify(Word::parse("100")) == Placement::inside);
  CHECK(o.classify(Word::parse("101")) == Placement::straddles);
  CHECK(o.describe() == "interval[0,sqrt(1/2))");
  CHECK(kind_of([&] { o.classify(bits(0, 65)); }) == ErrorKind::InvalidArgument);
  // Exactly one straddling word at every depth; it carries the threshold digits.
  for (int m = 1; m <= 16; ++m) {
    int straddle = 0;
    for (unsigned long v = 0; v < (1ul << m); ++v) straddle += o.classify(bits(v, m)) == Placement::straddles;
    CHECK(straddle == 1);
  }
  CHECK_THROWS_AS(IntervalOracle(NaryThreshold::sqrt_rational(2, 1, 2), NaryThreshold::sqrt_rational(2, 1, 3)), Error);
}

TEST_CASE("cylinder oracle") {
  const Sft s = Sft::full_shift(2);
  const CylinderOracle o(s, CylinderUnion(s, 2, {Word::parse("01"), Word::parse("00")}));
  CHECK(o.classify(Word::parse("0")) == Placement::inside);
  CHECK(o.classify(Word::parse("1")) == Placement::outside);
  CHECK(o.classify(Word::parse("011")) == Placement::inside);
  const CylinderOracle p(s, CylinderUnion(s, 2, {Word::parse("01")}));
  CHECK(p.classify(Word::parse("0")) == Placement::straddles);
}

namespace {

class InconsistentOracle final : public BorelOracle {
 public:
  int alphabet_size() const override { return 2; }
  Placement classify(const Word& w) const override {
    if (w.size() == 1) return w[0] == 0 ? Placement::inside : Placement::straddles;
    return Placement::outside;
  }
  std::string describe() const override { return "inconsistent"; }
};

class AlwaysStraddles final : public BorelOracle {
 public:
  int alphabet_size() const override { return 2; }
  Placement classify(const Word&) const override { return Placement::straddles; }
  std::string describe() const override { return "everything straddles"; }
};

}  // namespace

TEST_CASE("refinement audit detects inconsistent oracles") {
  CHECK(kind_of([] { audit_refinement(InconsistentOracle(), Sft::full_shift(2), 6, 1000, 1); }) ==
        ErrorKind::OracleInconsistent);
  const IntervalOracle o(NaryThreshold::zero(2), NaryThreshold::sqrt_rational(2, 1, 2));
  CHECK_NOTHROW(audit_refinement(o, Sft::full_shift(2), 14, 1000, 1));
}

TEST_CASE("approximation families for the interval [0, 1/sqrt 2)") {
  const Sft s = Sft::full_shift(2);
  const IntervalOracle o(NaryThreshold::zero(2), NaryThreshold::sqrt_rational(2, 1, 2));
  const LocalPotential z = LocalPotential::zero(s);
  double prev_inner = 0.0, prev_outer = 1.0;
  for (int m = 4; m <= 12; ++m) {
    const ApproxFamily f = build_approximations(o, s, z, m);
    CAPTURE(m);
    CHECK(f.boundary.size() == 1);
    CHECK(f.stats.mass_boundary == std::ldexp(1.0, -m));
    CHECK(f.stats.mass_inner + f.stats.mass_boundary == doctest::Approx(f.stats.mass_outer).epsilon(1e-15));
    CHECK(f.stats.mass_inner >= prev_inner);
    CHECK(f.stats.mass_outer <= prev_outer);
    CHECK(f.stats.mass_inner <= std::sqrt(0.5));
    CHECK(f.stats.mass_outer >= std::sqrt(0.5));
    prev_inner = f.stats.mass_inner;
    prev_outer = f.stats.mass_outer;
  }
}

TEST_CASE("decay fit") {
  std::vector<int> ms;
  std::vector<double> masses;
  for (int m = 4; m <= 12; ++m) {
    ms.push_back(m);
    masses.push_back(std::ldexp(1.0, -m));
  }
  const DecayFit fit = decay_fit(ms, masses, std::log(2.0));
  CHECK(std::abs(fit.theta_hat.value() - std::log(2.0)) < 1e-9);
  CHECK(fit.c_hat == doctest::Approx(1.0));
  CHECK(fit.implied_gap.value() == doctest::Approx(std::log(2.0) / 2));
  CHECK_FALSE(fit.no_gap_evidence);

  const DecayFit flat = decay_fit({4, 5, 6}, {0.1, 0.1, 0.1}, 1.0);
  CHECK(flat.no_gap_evidence);
  CHECK(decay_fit({4, 5, 6}, {0.0, 0.0, 0.0}, 1.0).theta_hat.is_pos_infinity());
  CHECK(kind_of([] { decay_fit({4, 5}, {0.1, 0.05}, 1.0); }) == ErrorKind::InsufficientData);
}

TEST_CASE("sandwich curves and DM diagnostics") {
  const Sft s = Sft::full_shift(2);
  const IntervalOracle o(NaryThreshold::zero(2), NaryThreshold::sqrt_rational(2, 1, 2));
  const std::vector<int> ms = {4, 6, 8, 10};
  const SandwichTable t = sandwich_curves(o, s, LocalPotential::zero(s), ms, {-0.5, 0.0, 0.2});
  double prev = INFINITY;
  for (int m : ms) {
    const SandwichRow& r = t.at(m, -0.5);
    CHECK(r.ordering_ok);
    REQUIRE(r.gap);
    CHECK(*r.gap <= prev);
    prev = *r.gap;
    CHECK(t.at(m, 0.2).ordering_ok);
    CHECK(t.at(m, 0.0).psi_inner.value() == 0.0);
  }
  CHECK(prev < 0.05);
  const DmReport dm = dm_diagnostics(t.families.back(), 3.0);
  CHECK(dm.max_boundary.value() < 1.0 / 3.0);
  CHECK(dm.criterion);
  CHECK(dm.slope_ok);

  // D = all words: max = 1 and the criterion fails for any v > 1.
  const ApproxFamily fam = build_approximations(AlwaysStraddles(), s, LocalPotential::zero(s), 3);
  CHECK(fam.boundary.size() == 8);
  CHECK(fam.inner.empty());
  for (double v : {1.5, 3.0, 10.0}) {
    const DmReport r = dm_diagnostics(fam, v);
    CHECK(r.max_boundary.value() == 1.0);
    CHECK_FALSE(r.criterion);
    CHECK(r.slope_ok);
  }
}

TEST_CASE("empty inner approximation is reported") {
  const Sft s = Sft::full_shift(2);
  const IntervalOracle o(NaryThreshold::sqrt_rational(2, 1, 2), NaryThreshold::sqrt_rational(2, 5, 7));
  const SandwichTable t = sandwich_curves(o, s, LocalPotential::zero(s), {2}, {-0.5});
  CHECK_FALSE(t.at(2, -0.5).psi_inner.has_value());
  CHECK(t.at(2, -0.5).note == "EmptyInnerApproximation");
}

TEST_CASE("external oracle line protocol") {
  const std::string script = "/tmp/returnldp_test_oracle.sh";
  {
    std::ofstream f(script);
    f << "#!/bin/sh\nwhile read cmd word; do\n"
         "  case \"$word\" in 0*) echo IN;; 1) echo STRADDLE;; 1*) echo OUT;; *) echo STRADDLE;; esac\n"
         "done\n";
  }
  const ExternalOracle o("sh " + script, 2);
  CHECK(o.classify(Word::parse("0")) == Placement::inside);
  CHECK(o.classify(Word::parse("1")) == Placement::straddles);
  CHECK(o.classify(Word::parse("10")) == Placement::outside);
  CHECK(o.classify(Word::parse("0")) == Placement::inside);
  CHECK(kind_of([&] { o.classify(Word::parse("2")); }) == ErrorKind::InvalidArgument);

  const ExternalOracle bad("echo MAYBE", 2);
  CHECK(kind_of([&] { bad.classify(Word::parse("0")); }) == ErrorKind::OracleProtocol);
  const ExternalOracle dead("true", 2);
  CHECK(kind_of([&] { dead.classify(Word::parse("0")); }) == ErrorKind::OracleProtocol);
}

TEST_CASE("counter RNG is a pure function of (seed, stream, draw)") {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    CHECK(x != c.next());
  }
  CounterRng u(1, 1);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) mean += u.uniform();
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
