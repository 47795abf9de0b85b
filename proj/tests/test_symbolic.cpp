#include "oracles.hpp"

#include "returnldp/mean_cycle.hpp"
#include "returnldp/spectral.hpp"
#include "returnldp/symbolic.hpp"
#include "returnldp/thermodynamics.hpp"

#include <doctest.h>

using namespace returnldp;

namespace {

BoolMatrix matrix(std::initializer_list<std::initializer_list<int>> rows) {
  BoolMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (int v : r) m(i, j++) = v != 0;
    ++i;
  }
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("words parse, print and slice") {
  const Word w = Word::parse("0110");
  CHECK(w.str() == "0110");
  CHECK(w.size() == 4);
  CHECK(w.prefix(2).str() == "01");
  CHECK(w.subword(1, 3).str() == "110");
  CHECK(w.extended(0).str() == "01100");
  CHECK(Word::parse("a9").str() == "a9");
}

TEST_CASE("validate_sft accepts primitive matrices and rejects others") {
  CHECK(validate_sft(matrix({{1, 1}, {1, 0}})) == Sft::golden_mean());
  CHECK(kind_of([] { validate_sft(matrix({{0, 1}, {1, 0}})); }) == ErrorKind::NotPrimitive);
  CHECK(kind_of([] { validate_sft(matrix({{1, 0}, {0, 1}})); }) == ErrorKind::NotPrimitive);
  CHECK(kind_of([] { validate_sft(matrix({{1, 1}, {0, 0}})); }) == ErrorKind::EmptyRowOrColumn);
}

TEST_CASE("admissible words are counted by matrix powers") {
  const Sft g = Sft::golden_mean();
  // Fibonacci numbers count golden-mean words.
  CHECK(admissible_words(g, 1).size() == 2);
  CHECK(admissible_words(g, 5).size() == 13);
  CHECK(admissible_words(g, 10).size() == 144);
  CHECK(g.admissible(Word::parse("0100")));
  CHECK_FALSE(g.admissible(Word::parse("0110")));
  for (int L = 1; L <= 8; ++L) CHECK(admissible_words(g, L).size() == oracle::words(g, L).size());
}

TEST_CASE("higher-block recoding") {
  const Sft g = Sft::golden_mean();
  const BlockSft b = recode(g, 3);
  CHECK(b.state_count() == 5);
  CHECK(b.edge_count() == 8);
  const Word w = Word::parse("0010010");
  const auto path = b.encode(w);
  CHECK(path.size() == w.size() - 2);
  CHECK(b.decode(path) == w);
  CHECK(kind_of([&] { b.encode(Word::parse("0110")); }) == ErrorKind::InadmissibleWord);
  CHECK(kind_of([&] { recode(Sft::full_shift(2), 12, 100); }) == ErrorKind::StateCapExceeded);
}

TEST_CASE("cylinder unions") {
  const Sft s = Sft::full_shift(2);
  const CylinderUnion R(s, 2, {Word::parse("01"), Word::parse("10")});
  CHECK(R.contains_prefix(Word::parse("011")));
  CHECK_FALSE(R.contains_prefix(Word::parse("0")));
  const CylinderUnion r3 = R.refined(s, 3);
  CHECK(r3.size() == 4);
  const CylinderUnion c = R.complement(s);
  CHECK(c.size() == 2);
  CHECK(c.contains_prefix(Word::parse("00")));
  CHECK(kind_of([&] { CylinderUnion(Sft::golden_mean(), 2, {Word::parse("11")}); }) == ErrorKind::InadmissibleWord);

  const CylinderUnion shifted = canonical_shift_reduction(s, {{1, Word::parse("010")}, {1, Word::parse("111")}});
  CHECK(shifted.cylinder_length() == 3);
  CHECK(shifted.size() == 2);
  CHECK(kind_of([&] { canonical_shift_reduction(s, {{1, Word::parse("010")}, {0, Word::parse("1")}}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("state indicator of R on the block chain") {
  const BlockSft b = recode(Sft::full_shift(2), 2);
  const StateMask m = indicator_weight(b, CylinderUnion(Sft::full_shift(2), 1, {Word::parse("0")}));
  for (std::size_t s = 0; s < b.state_count(); ++s) CHECK(m(static_cast<Eigen::Index>(s)) == (b.state(s)[0] == 0));
  CHECK(kind_of([&] { indicator_weight(recode(Sft::full_shift(2), 1), CylinderUnion::all_words(Sft::full_shift(2), 2)); }) ==
        ErrorKind::BlockTooShort);
}

TEST_CASE("local potentials") {
  const Sft s = Sft::full_shift(2);
  const LocalPotential phi = LocalPotential::per_symbol(s, {0.5, -1.0});
  CHECK(phi.span() == 1);
  CHECK(phi(Word::parse("01")) == doctest::Approx(0.5));
  CHECK(phi(Word::parse("10")) == doctest::Approx(-1.0));
  CHECK(kind_of([&] { LocalPotential(s, 2, {{Word::parse("00"), 1.0}}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("Karp maximum mean cycle matches periodic-orbit enumeration") {
  const std::vector<std::pair<Sft, std::vector<std::string>>> cases = {
      {Sft::full_shift(2), {"0"}},
      {Sft::golden_mean(), {"0"}},
      {Sft::golden_mean(), {"00"}},
      {Sft::full_shift(3), {"01", "12"}},
      {Sft::full_shift(2), {"010", "111"}},
  };
  for (const auto& [sft, ws] : cases) {
    std::vector<Word> words;
    std::vector<std::vector<int>> iwords;
    for (const auto& w : ws) {
      words.push_back(Word::parse(w));
      iwords.emplace_back(w.begin(), w.end());
      for (auto& c : iwords.back()) c -= '0';
    }
    const CylinderUnion R(sft, static_cast<int>(ws.front().size()), words);
    const BlockSft b = recode(sft, R.cylinder_length());
    const ErgodicExtrema ext = max_min_measure(b, R);
    const auto [hi, lo] = oracle::periodic_extremes(sft, iwords, static_cast<int>(b.state_count()));
    CAPTURE(ws.front());
    CHECK(ext.max.numerator == hi.num);
    CHECK(ext.max.denominator == hi.den);
    CHECK(ext.min.numerator == lo.num);
    CHECK(ext.min.denominator == lo.den);
  }
}

TEST_CASE("Karp on a hand-built graph") {
  // 0 -> 1 -> 2 -> 0 and 1 -> 1; weights per vertex.
  Digraph g;
  g.offsets = {0, 1, 3, 4};
  g.targets = {1, 1, 2, 0};
  const std::vector<long> w = {3, 1, 2};
  const auto mx = max_mean_cycle<long>(g, w);
  REQUIRE(mx);
  CHECK(mx->numerator == 2);
  CHECK(mx->denominator == 1);
  const auto mn = min_mean_cycle<long>(g, w);
  REQUIRE(mn);
  CHECK(mn->value() == doctest::Approx(1.0));
}

TEST_CASE("Perron vector on dense and sparse inputs") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 1, 1, 0;
  const auto r = perron_vector(m);
  CHECK(std::exp(r.log_radius) == doctest::Approx(oracle::golden_ratio).epsilon(1e-12));
  CHECK(r.lower <= r.upper);
  // Period-2 matrix: the shift makes the iteration converge anyway.
  Eigen::MatrixXd p(2, 2);
  p << 0, 2, 8, 0;
  CHECK(std::exp(perron_vector(p).log_radius) == doctest::Approx(4.0).epsilon(1e-12));
  const SparseMatrix sp = m.sparseView();
  CHECK(perron_vector(sp).log_radius == doctest::Approx(r.log_radius).epsilon(1e-12));
}

TEST_CASE("log-space Perron iteration handles weight ratios beyond the double range") {
  const BlockSft b = recode(Sft::full_shift(2), 1);
  SparseMatrix pattern(2, 2);
  pattern.insert(0, 0) = 1;
  pattern.insert(0, 1) = 1;
  pattern.insert(1, 0) = 1;
  pattern.insert(1, 1) = 1;
  Eigen::VectorXd lw(2);
  lw << 0.0, 900.0;
  // Rank one: rho = e^0 + e^900.
  CHECK(perron_log_radius_logspace(pattern, lw) == doctest::Approx(900.0).epsilon(1e-14));
  lw << std::log(2.0), std::log(3.0);
  CHECK(perron_log_radius_logspace(pattern, lw) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("log spectral radius of reducible matrices") {
  SparseMatrix m(3, 3);
  m.insert(0, 1) = 1;
  m.insert(1, 0) = 4;
  m.insert(1, 2) = 1;
  m.insert(2, 2) = 3;
  const auto r = log_spectral_radius(m);
  REQUIRE(r);
  CHECK(*r == doctest::Approx(std::log(3.0)));
  SparseMatrix nil(2, 2);
  nil.insert(0, 1) = 1;
  CHECK_FALSE(log_spectral_radius(nil).has_value());
}
