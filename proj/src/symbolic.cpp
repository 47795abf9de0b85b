#include "returnldp/symbolic.hpp"

#include "returnldp/error.hpp"

#include <algorithm>
#include <cmath>

namespace returnldp {

namespace {

char symbol_char(Symbol s) {
  return s < 10 ? static_cast<char>('0' + s) : static_cast<char>('a' + (s - 10));
}

}  // namespace

Word Word::parse(std::string_view text) {
  std::vector<Symbol> out;
  out.reserve(text.size());
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      out.push_back(static_cast<Symbol>(c - '0'));
    } else if (c >= 'a' && c <= 'z') {
      out.push_back(static_cast<Symbol>(10 + (c - 'a')));
    } else {
      throw Error(ErrorKind::InvalidArgument, "invalid symbol character '" + std::string(1, c) + "'");
    }
  }
  return Word(std::move(out));
}

std::string Word::str() const {
  std::string s;
  s.reserve(symbols_.size());
  for (Symbol x : symbols_) s.push_back(symbol_char(x));
  return s;
}

Word Word::prefix(std::size_t n) const {
  return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Word Word::subword(std::size_t pos, std::size_t len) const {
  auto first = symbols_.begin() + static_cast<std::ptrdiff_t>(pos);
  return Word(std::vector<Symbol>(first, first + static_cast<std::ptrdiff_t>(len)));
}

Word Word::extended(Symbol s) const {
  std::vector<Symbol> v = symbols_;
  v.push_back(s);
  return Word(std::move(v));
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (Symbol s : w.symbols()) {
    h ^= static_cast<std::size_t>(s) + 1;
    h *= 1099511628211ull;
  }
  return h;
}

bool Sft::admissible(const Word& w) const {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] >= alphabet_size()) return false;
    if (i > 0 && !allowed(w[i - 1], w[i])) return false;
  }
  return true;
}

Sft Sft::full_shift(int n) { return validate_sft(BoolMatrix::Constant(n, n, true)); }

Sft Sft::golden_mean() {
  BoolMatrix m(2, 2);
  m << true, true, true, false;
  return validate_sft(m);
}

Sft validate_sft(const BoolMatrix& transitions) {
  const auto n = transitions.rows();
  if (n != transitions.cols()) throw Error(ErrorKind::InvalidArgument, "transition matrix is not square");
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "alphabet must have at least 2 symbols");
  if (n > max_alphabet_size) throw Error(ErrorKind::InvalidArgument, "alphabet larger than 36 symbols");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!transitions.row(i).any() || !transitions.col(i).any()) {
      throw Error(ErrorKind::EmptyRowOrColumn, "row or column " + std::to_string(i) + " has no allowed transition");
    }
  }
  // Wielandt: a primitive n x n matrix has A^k > 0 for k = (n-1)^2 + 1.
  const Eigen::MatrixXi a = transitions.cast<int>();
  Eigen::MatrixXi power = a;
  const long bound = (n - 1) * (n - 1) + 1;
  for (long k = 1; k < bound; ++k) {
    power = (power * a).cwiseMin(1);
  }
  if ((power.array() == 0).any()) {
    throw Error(ErrorKind::NotPrimitive, "transition matrix is not irreducible and aperiodic");
  }
  return Sft(transitions);
}

std::vector<Word> admissible_words(const Sft& sft, int length, std::size_t cap) {
  if (length < 1) throw Error(ErrorKind::InvalidArgument, "word length must be positive");
  const int n = sft.alphabet_size();
  std::vector<Word> out;
  std::vector<Symbol> cur;
  cur.reserve(static_cast<std::size_t>(length));
  // Iterative depth-first enumeration in lexicographic order.
  std::vector<int> next(static_cast<std::size_t>(length) + 1, 0);
  std::size_t depth = 0;
  while (true) {
    if (depth == static_cast<std::size_t>(length)) {
      if (out.size() >= cap) {
        throw Error(ErrorKind::StateCapExceeded,
                    "more than " + std::to_string(cap) + " admissible words of length " + std::to_string(length));
      }
      out.emplace_back(cur);
      cur.pop_back();
      --depth;
      continue;
    }
    int& s = next[depth];
    while (s < n && depth > 0 && !sft.allowed(cur.back(), static_cast<Symbol>(s))) ++s;
    if (s >= n) {
      if (depth == 0) break;
      s = 0;
      cur.pop_back();
      --depth;
      continue;
    }
    cur.push_back(static_cast<Symbol>(s));
    ++s;
    ++depth;
    next[depth] = 0;
  }
  return out;
}

std::optional<std::size_t> BlockSft::index_of(const Word& w) const {
  auto it = data_->index.find(w);
  if (it == data_->index.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> BlockSft::encode(const Word& w) const {
  const auto L = static_cast<std::size_t>(block_length());
  if (w.size() < L) throw Error(ErrorKind::BlockTooShort, "word shorter than the block length");
  std::vector<std::size_t> path;
  path.reserve(w.size() - L + 1);
  for (std::size_t i = 0; i + L <= w.size(); ++i) {
    auto idx = index_of(w.subword(i, L));
    if (!idx) throw Error(ErrorKind::InadmissibleWord, "word '" + w.str() + "' is not admissible");
    path.push_back(*idx);
  }
  return path;
}

Word BlockSft::decode(std::span<const std::size_t> path) const {
  if (path.empty()) return Word();
  std::vector<Symbol> out = state(path[0]).symbols();
  for (std::size_t i = 1; i < path.size(); ++i) {
    auto succ = successors(path[i - 1]);
    if (std::find(succ.begin(), succ.end(), path[i]) == succ.end()) {
      throw Error(ErrorKind::InvalidArgument, "state path is not a walk in the block graph");
    }
    out.push_back(state(path[i]).back());
  }
  return Word(std::move(out));
}

BlockSft recode(const Sft& sft, int block_length, std::size_t state_cap) {
  if (block_length < 1) throw Error(ErrorKind::InvalidArgument, "block length must be positive");
  auto data = std::make_shared<BlockSft::Data>(BlockSft::Data{sft, block_length, {}, {}, {}});
  data->states = admissible_words(sft, block_length, state_cap);
  data->index.reserve(data->states.size());
  for (std::size_t i = 0; i < data->states.size(); ++i) data->index.emplace(data->states[i], i);

  const int n = sft.alphabet_size();
  auto& g = data->graph;
  g.offsets.reserve(data->states.size() + 1);
  g.offsets.push_back(0);
  for (const Word& u : data->states) {
    const Word tail = u.subword(1, u.size() - 1);
    for (int b = 0; b < n; ++b) {
      if (!sft.allowed(u.back(), static_cast<Symbol>(b))) continue;
      auto it = data->index.find(tail.extended(static_cast<Symbol>(b)));
      g.targets.push_back(static_cast<std::uint32_t>(it->second));
    }
    g.offsets.push_back(g.targets.size());
  }
  return BlockSft(std::move(data));
}

LocalPotential::LocalPotential(const Sft& sft, int span, std::map<Word, double> values)
    : span_(span), values_(std::move(values)) {
  if (span < 1) throw Error(ErrorKind::InvalidArgument, "potential span must be positive");
  for (const auto& [w, v] : values_) {
    if (static_cast<int>(w.size()) != span) {
      throw Error(ErrorKind::InvalidArgument, "potential word '" + w.str() + "' does not have length " + std::to_string(span));
    }
    if (!sft.admissible(w)) throw Error(ErrorKind::InadmissibleWord, "potential word '" + w.str() + "' is not admissible");
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "potential value for '" + w.str() + "' is not finite");
  }
  for (const Word& w : admissible_words(sft, span)) {
    if (!values_.contains(w)) throw Error(ErrorKind::InvalidArgument, "potential has no value for '" + w.str() + "'");
  }
}

LocalPotential LocalPotential::zero(const Sft& sft) {
  return per_symbol(sft, std::vector<double>(static_cast<std::size_t>(sft.alphabet_size()), 0.0));
}

LocalPotential LocalPotential::per_symbol(const Sft& sft, const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(sft.alphabet_size())) {
    throw Error(ErrorKind::InvalidArgument, "need one potential value per symbol");
  }
  std::map<Word, double> table;
  for (std::size_t s = 0; s < values.size(); ++s) table.emplace(Word({static_cast<Symbol>(s)}), values[s]);
  return LocalPotential(sft, 1, std::move(table));
}

double LocalPotential::operator()(const Word& w) const {
  if (static_cast<int>(w.size()) < span_) throw Error(ErrorKind::SpanTooLarge, "word shorter than potential span");
  if (static_cast<int>(w.size()) == span_) return values_.at(w);
  return values_.at(w.prefix(static_cast<std::size_t>(span_)));
}

CylinderUnion::CylinderUnion(const Sft& sft, int cylinder_length, std::vector<Word> words)
    : length_(cylinder_length), words_(std::move(words)) {
  if (cylinder_length < 1) throw Error(ErrorKind::InvalidArgument, "cylinder length must be positive");
  for (const Word& w : words_) {
    if (static_cast<int>(w.size()) != cylinder_length) {
      throw Error(ErrorKind::InvalidArgument, "cylinder word '" + w.str() + "' does not have length " + std::to_string(cylinder_length));
    }
    if (!sft.admissible(w)) throw Error(ErrorKind::InadmissibleWord, "cylinder word '" + w.str() + "' is not admissible");
  }
  std::sort(words_.begin(), words_.end());
  if (std::adjacent_find(words_.begin(), words_.end()) != words_.end()) {
    throw Error(ErrorKind::InvalidArgument, "cylinder words are not distinct");
  }
  lookup_.insert(words_.begin(), words_.end());
}

CylinderUnion CylinderUnion::all_words(const Sft& sft, int length) {
  return CylinderUnion(sft, length, admissible_words(sft, length));
}

bool CylinderUnion::contains_prefix(const Word& w) const {
  if (static_cast<int>(w.size()) < length_) return false;
  if (static_cast<int>(w.size()) == length_) return lookup_.contains(w);
  return lookup_.contains(w.prefix(static_cast<std::size_t>(length_)));
}

CylinderUnion CylinderUnion::refined(const Sft& sft, int new_length) const {
  if (new_length < length_) throw Error(ErrorKind::InvalidArgument, "refinement must not shorten words");
  if (new_length == length_) return *this;
  std::vector<Word> out;
  for (const Word& w : admissible_words(sft, new_length)) {
    if (contains_prefix(w)) out.push_back(w);
  }
  return CylinderUnion(sft, new_length, std::move(out));
}

CylinderUnion CylinderUnion::complement(const Sft& sft) const {
  std::vector<Word> out;
  for (const Word& w : admissible_words(sft, length_)) {
    if (!lookup_.contains(w)) out.push_back(w);
  }
  return CylinderUnion(sft, length_, std::move(out));
}

StateMask indicator_weight(const BlockSft& block, const CylinderUnion& R) {
  if (block.block_length() < R.cylinder_length()) {
    throw Error(ErrorKind::BlockTooShort, "block length " + std::to_string(block.block_length()) +
                                              " is shorter than cylinder length " + std::to_string(R.cylinder_length()));
  }
  StateMask mask(static_cast<Eigen::Index>(block.state_count()));
  for (std::size_t s = 0; s < block.state_count(); ++s) {
    mask(static_cast<Eigen::Index>(s)) = R.contains_prefix(block.state(s));
  }
  return mask;
}

CylinderUnion canonical_shift_reduction(const Sft& sft, const std::vector<TwoSidedCylinder>& cylinders) {
  if (cylinders.empty()) throw Error(ErrorKind::InvalidArgument, "no cylinders given");
  const int m = cylinders.front().half_width;
  if (m < 0) throw Error(ErrorKind::InvalidArgument, "negative half-width");
  std::vector<Word> words;
  words.reserve(cylinders.size());
  for (const auto& c : cylinders) {
    if (c.half_width != m) throw Error(ErrorKind::InvalidArgument, "cylinders have mixed half-widths");
    if (static_cast<int>(c.symbols.size()) != 2 * m + 1) {
      throw Error(ErrorKind::InvalidArgument, "a (-m,m)-cylinder needs 2m+1 symbols");
    }
    if (!sft.admissible(c.symbols)) {
      throw Error(ErrorKind::InadmissibleWord, "cylinder word '" + c.symbols.str() + "' is not admissible");
    }
    words.push_back(c.symbols);
  }
  // sigma^m maps [x_{-m}..x_m] onto the one-sided cylinder of the same word.
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return CylinderUnion(sft, 2 * m + 1, std::move(words));
}

}  // namespace returnldp
