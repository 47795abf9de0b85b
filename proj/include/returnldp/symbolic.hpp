#pragma once

// Subshifts of finite type, words, higher-block recodings, cylinder unions
// and locally constant potentials. Everything here is immutable after
// construction; large tables are shared between copies.

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace returnldp {

using Symbol = std::uint8_t;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
using StateMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Largest alphabet representable in the "0-9a-z" text encoding.
inline constexpr int max_alphabet_size = 36;

/// One-sided finite word x_0 x_1 ... x_{L-1}.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

  /// Parses "0".."9", "a".."z" (one character per symbol).
  static Word parse(std::string_view text);

  std::string str() const;

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  Symbol back() const { return symbols_.back(); }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  Word prefix(std::size_t n) const;
  Word subword(std::size_t pos, std::size_t len) const;
  Word extended(Symbol s) const;

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> symbols_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

/// Topologically mixing one-step subshift of finite type.
class Sft {
 public:
  int alphabet_size() const { return static_cast<int>(transitions_.rows()); }
  const BoolMatrix& transitions() const { return transitions_; }
  bool allowed(Symbol from, Symbol to) const { return transitions_(from, to); }
  bool admissible(const Word& w) const;

  static Sft full_shift(int n);
  /// Transitions [[1,1],[1,0]]: the word "11" is forbidden.
  static Sft golden_mean();

  friend bool operator==(const Sft& a, const Sft& b) { return a.transitions_ == b.transitions_; }

 private:
  explicit Sft(BoolMatrix transitions) : transitions_(std::move(transitions)) {}
  friend Sft validate_sft(const BoolMatrix& transitions);

  BoolMatrix transitions_;
};

/// Checks the matrix is square with N >= 2, has no empty row or column and is
/// primitive (some power strictly positive). Throws NotPrimitive,
/// EmptyRowOrColumn or InvalidArgument.
Sft validate_sft(const BoolMatrix& transitions);

/// All admissible words of the given length, in lexicographic order.
std::vector<Word> admissible_words(const Sft& sft, int length,
                                   std::size_t cap = std::numeric_limits<std::size_t>::max());

/// Compressed adjacency: successors of v are targets[offsets[v] .. offsets[v+1]).
struct Digraph {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> targets;

  std::size_t vertex_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t edge_count() const { return targets.size(); }
  std::span<const std::uint32_t> successors(std::size_t v) const {
    return {targets.data() + offsets[v], targets.data() + offsets[v + 1]};
  }
};

/// Higher-block presentation: states are the admissible words of length L,
/// u -> v iff u[1..] == v[..L-1] and the overlap word is admissible.
class BlockSft {
 public:
  static constexpr std::size_t default_state_cap = 1'000'000;

  const Sft& base() const { return data_->base; }
  int block_length() const { return data_->block_length; }
  std::size_t state_count() const { return data_->states.size(); }
  std::size_t edge_count() const { return data_->graph.edge_count(); }
  const Word& state(std::size_t i) const { return data_->states[i]; }
  const std::vector<Word>& states() const { return data_->states; }
  const Digraph& graph() const { return data_->graph; }
  std::span<const std::uint32_t> successors(std::size_t s) const { return data_->graph.successors(s); }
  std::optional<std::size_t> index_of(const Word& w) const;

  /// Sliding-window state sequence of an admissible word of length >= L.
  std::vector<std::size_t> encode(const Word& w) const;
  /// Inverse of encode for a valid state path.
  Word decode(std::span<const std::size_t> path) const;

 private:
  struct Data {
    Sft base;
    int block_length;
    std::vector<Word> states;
    std::unordered_map<Word, std::size_t, WordHash> index;
    Digraph graph;
  };
  explicit BlockSft(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
  friend BlockSft recode(const Sft&, int, std::size_t);

  std::shared_ptr<const Data> data_;
};

/// Higher-block recoding. Throws StateCapExceeded above `state_cap` states.
BlockSft recode(const Sft& sft, int block_length,
                std::size_t state_cap = BlockSft::default_state_cap);

/// Potential depending on the first `span` coordinates, tabulated over
/// admissible span-words (nats per step).
class LocalPotential {
 public:
  LocalPotential(const Sft& sft, int span, std::map<Word, double> values);

  static LocalPotential zero(const Sft& sft);
  /// Span-1 potential with the given value per symbol.
  static LocalPotential per_symbol(const Sft& sft, const std::vector<double>& values);

  int span() const { return span_; }
  const std::map<Word, double>& values() const { return values_; }
  /// Value at a point whose first coordinates are `w` (|w| >= span).
  double operator()(const Word& w) const;

 private:
  int span_;
  std::map<Word, double> values_;
};

/// Finite union of one-sided cylinders [w] with |w| = cylinder_length.
class CylinderUnion {
 public:
  CylinderUnion(const Sft& sft, int cylinder_length, std::vector<Word> words);

  static CylinderUnion all_words(const Sft& sft, int length);

  int cylinder_length() const { return length_; }
  const std::vector<Word>& words() const { return words_; }
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }
  /// True iff the first cylinder_length symbols of `w` form a member word.
  bool contains_prefix(const Word& w) const;

  /// Same set written with words of a longer length.
  CylinderUnion refined(const Sft& sft, int new_length) const;
  /// Admissible cylinder_length-words not in this union.
  CylinderUnion complement(const Sft& sft) const;

 private:
  int length_;
  std::vector<Word> words_;
  std::unordered_set<Word, WordHash> lookup_;
};

/// Per-state membership of the block chain in R (prefix test).
/// Throws BlockTooShort when L < R.cylinder_length().
StateMask indicator_weight(const BlockSft& block, const CylinderUnion& R);

/// A cylinder prescribing x_{-m} .. x_m; `symbols` has length 2m+1.
struct TwoSidedCylinder {
  int half_width;
  Word symbols;
};

/// Shifts a list of (-m,m)-cylinders by m to the one-sided convention.
/// All half-widths must agree (InvalidArgument) and every word must be
/// admissible (InadmissibleWord).
CylinderUnion canonical_shift_reduction(const Sft& sft, const std::vector<TwoSidedCylinder>& cylinders);

}  // namespace returnldp
