#include "returnldp/config.hpp"

#include "returnldp/deviations.hpp"
#include "returnldp/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace returnldp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ConfigError, "field '" + where + "': " + what);
}

std::string at(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string at(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      std::string list;
      for (auto a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      fail(at(path, k), "unknown field (expected one of: " + list + ")");
    }
  }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long get_integer(const json& v, const std::string& path, long min_value) {
  if (v.is_number_integer() || v.is_number_unsigned()) {
    const long x = v.get<long>();
    if (x < min_value) fail(path, "must be at least " + std::to_string(min_value));
    return x;
  }
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d == std::floor(d) && std::abs(d) < 9e15) {
      if (d < static_cast<double>(min_value)) fail(path, "must be at least " + std::to_string(min_value));
      return static_cast<long>(d);
    }
  }
  fail(path, "expected an integer");
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

Word get_word(const json& v, const std::string& path) {
  const std::string s = get_string(v, path);
  try {
    return Word::parse(s);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

// A list of numbers or {"start", "stop", "count"}.
std::vector<double> get_real_grid(const json& v, const std::string& path) {
  std::vector<double> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], at(path, i)));
    return out;
  }
  if (v.is_object()) {
    only_keys(v, path, {"start", "stop", "count"});
    for (auto k : {"start", "stop", "count"}) {
      if (!v.contains(k)) fail(at(path, k), "missing");
    }
    const double a = get_number(v["start"], at(path, "start"));
    const double b = get_number(v["stop"], at(path, "stop"));
    const long c = get_integer(v["count"], at(path, "count"), 2);
    return linspace(a, b, static_cast<int>(c));
  }
  fail(path, "expected a list of numbers or {start, stop, count}");
}

std::vector<int> get_int_grid(const json& v, const std::string& path, int min_value) {
  std::vector<int> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(static_cast<int>(get_integer(v[i], at(path, i), min_value)));
    }
    return out;
  }
  if (v.is_object()) {
    only_keys(v, path, {"start", "stop", "step"});
    if (!v.contains("start") || !v.contains("stop")) fail(path, "needs start and stop");
    const long a = get_integer(v["start"], at(path, "start"), min_value);
    const long b = get_integer(v["stop"], at(path, "stop"), a);
    const long s = v.contains("step") ? get_integer(v["step"], at(path, "step"), 1) : 1;
    for (long x = a; x <= b; x += s) out.push_back(static_cast<int>(x));
    return out;
  }
  fail(path, "expected a list of integers or {start, stop, step}");
}

Sft parse_system(const json& v, const std::string& path) {
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "golden-mean") return Sft::golden_mean();
    if (name.starts_with("full-shift-")) {
      try {
        return Sft::full_shift(std::stoi(name.substr(11)));
      } catch (const std::logic_error&) {
      }
    }
    fail(path, "unknown system name '" + name + "' (use golden-mean, full-shift-<N> or a transition matrix)");
  }
  only_keys(v, path, {"alphabet_size", "transitions"});
  if (!v.contains("transitions")) fail(at(path, "transitions"), "missing");
  const json& t = v["transitions"];
  const std::string tp = at(path, "transitions");
  if (!t.is_array() || t.empty()) fail(tp, "expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(t.size());
  BoolMatrix m(n, n);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t[i].is_array() || t[i].size() != t.size()) fail(at(tp, i), "row must have " + std::to_string(n) + " entries");
    for (std::size_t j = 0; j < t.size(); ++j) {
      const long x = get_integer(t[i][j], at(at(tp, i), j), 0);
      if (x > 1) fail(at(at(tp, i), j), "entries must be 0 or 1");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x == 1;
    }
  }
  if (v.contains("alphabet_size") && get_integer(v["alphabet_size"], at(path, "alphabet_size"), 2) != n) {
    fail(at(path, "alphabet_size"), "does not match the transition matrix");
  }
  return validate_sft(m);
}

LocalPotential parse_potential(const json& v, const std::string& path, const Sft& sft) {
  only_keys(v, path, {"span", "values", "per_symbol"});
  if (v.contains("per_symbol")) {
    std::vector<double> xs;
    const json& p = v["per_symbol"];
    if (!p.is_array()) fail(at(path, "per_symbol"), "expected a list of numbers");
    for (std::size_t i = 0; i < p.size(); ++i) xs.push_back(get_number(p[i], at(at(path, "per_symbol"), i)));
    try {
      return LocalPotential::per_symbol(sft, xs);
    } catch (const Error& e) {
      fail(at(path, "per_symbol"), e.what());
    }
  }
  if (!v.contains("values")) return LocalPotential::zero(sft);
  const int span = v.contains("span") ? static_cast<int>(get_integer(v["span"], at(path, "span"), 1)) : 1;
  const json& vals = v["values"];
  if (!vals.is_object()) fail(at(path, "values"), "expected an object mapping words to numbers");
  std::map<Word, double> table;
  for (const auto& [k, x] : vals.items()) {
    Word w;
    try {
      w = Word::parse(k);
    } catch (const Error& e) {
      fail(at(at(path, "values"), k), e.what());
    }
    table[w] = get_number(x, at(at(path, "values"), k));
  }
  try {
    return LocalPotential(sft, span, std::move(table));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

CylinderUnion parse_cylinders(const json& v, const std::string& path, const Sft& sft) {
  only_keys(v, path, {"type", "length", "words", "two_sided"});
  if (v.contains("two_sided")) {
    const json& ts = v["two_sided"];
    const std::string tp = at(path, "two_sided");
    if (!ts.is_array()) fail(tp, "expected a list of {half_width, word}");
    std::vector<TwoSidedCylinder> cyl;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      only_keys(ts[i], at(tp, i), {"half_width", "word"});
      if (!ts[i].contains("half_width") || !ts[i].contains("word")) fail(at(tp, i), "needs half_width and word");
      cyl.push_back({static_cast<int>(get_integer(ts[i]["half_width"], at(at(tp, i), "half_width"), 0)),
                     get_word(ts[i]["word"], at(at(tp, i), "word"))});
    }
    try {
      return canonical_shift_reduction(sft, cyl);
    } catch (const Error& e) {
      fail(tp, e.what());
    }
  }
  if (!v.contains("words")) fail(at(path, "words"), "missing");
  const json& ws = v["words"];
  if (!ws.is_array() || ws.empty()) fail(at(path, "words"), "expected a non-empty list of words");
  std::vector<Word> words;
  for (std::size_t i = 0; i < ws.size(); ++i) words.push_back(get_word(ws[i], at(at(path, "words"), i)));
  const int len = v.contains("length") ? static_cast<int>(get_integer(v["length"], at(path, "length"), 1))
                                       : static_cast<int>(words.front().size());
  try {
    return CylinderUnion(sft, len, std::move(words));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

TargetSpec parse_target(const json& v, const std::string& path, const Sft& sft) {
  if (!v.is_object()) fail(path, "expected an object");
  const std::string type = v.contains("type") ? get_string(v["type"], at(path, "type")) : "cylinders";
  TargetSpec t;
  if (type == "cylinders") {
    t.kind = TargetKind::cylinders;
    t.cylinders = parse_cylinders(v, path, sft);
  } else if (type == "interval") {
    only_keys(v, path, {"type", "lo", "hi", "threshold_depth"});
    t.kind = TargetKind::interval;
    if (v.contains("lo")) t.lo = get_string(v["lo"], at(path, "lo"));
    if (v.contains("hi")) t.hi = get_string(v["hi"], at(path, "hi"));
    if (v.contains("threshold_depth")) {
      t.threshold_depth = static_cast<int>(get_integer(v["threshold_depth"], at(path, "threshold_depth"), 8));
    }
    if (sft.transitions().count() != sft.alphabet_size() * sft.alphabet_size()) {
      fail(path, "interval targets require a full shift");
    }
    NaryThreshold::parse(t.lo, sft.alphabet_size(), t.threshold_depth);
    NaryThreshold::parse(t.hi, sft.alphabet_size(), t.threshold_depth);
  } else if (type == "external") {
    only_keys(v, path, {"type", "command"});
    t.kind = TargetKind::external;
    if (!v.contains("command")) fail(at(path, "command"), "missing");
    t.command = get_string(v["command"], at(path, "command"));
  } else {
    fail(at(path, "type"), "must be cylinders, interval or external");
  }
  return t;
}

CheckSettings parse_checks(const json& v, const std::string& path, const Sft& sft) {
  only_keys(v, path,
            {"v", "induced_horizon", "duality_alphas", "entrance_set", "entrance_alpha", "entrance_ns",
             "concentration_alpha", "concentration_delta", "concentration_margin", "mc_n", "mc_u", "gibbs_n_max",
             "complement_us"});
  CheckSettings c;
  if (v.contains("v")) c.v = get_number(v["v"], at(path, "v"));
  if (v.contains("induced_horizon")) {
    c.induced_horizon = static_cast<int>(get_integer(v["induced_horizon"], at(path, "induced_horizon"), 1));
  }
  if (v.contains("duality_alphas")) c.duality_alphas = get_real_grid(v["duality_alphas"], at(path, "duality_alphas"));
  if (v.contains("entrance_set")) c.entrance_set = parse_cylinders(v["entrance_set"], at(path, "entrance_set"), sft);
  if (v.contains("entrance_alpha")) c.entrance_alpha = get_number(v["entrance_alpha"], at(path, "entrance_alpha"));
  if (v.contains("entrance_ns")) c.entrance_ns = get_int_grid(v["entrance_ns"], at(path, "entrance_ns"), 1);
  if (v.contains("concentration_alpha")) {
    c.concentration_alpha = get_number(v["concentration_alpha"], at(path, "concentration_alpha"));
  }
  if (v.contains("concentration_delta")) {
    c.concentration_delta = get_number(v["concentration_delta"], at(path, "concentration_delta"));
    if (!(c.concentration_delta > 0.0)) fail(at(path, "concentration_delta"), "must be positive");
  }
  if (v.contains("concentration_margin")) {
    c.concentration_margin = get_number(v["concentration_margin"], at(path, "concentration_margin"));
  }
  if (v.contains("mc_n")) c.mc_n = static_cast<int>(get_integer(v["mc_n"], at(path, "mc_n"), 1));
  if (v.contains("mc_u")) c.mc_u = get_number(v["mc_u"], at(path, "mc_u"));
  if (v.contains("gibbs_n_max")) c.gibbs_n_max = static_cast<int>(get_integer(v["gibbs_n_max"], at(path, "gibbs_n_max"), 3));
  if (v.contains("complement_us")) c.complement_us = get_real_grid(v["complement_us"], at(path, "complement_us"));
  return c;
}

const std::map<std::string, std::string, std::less<>>& presets() {
  static const std::map<std::string, std::string, std::less<>> table{
      {"bernoulli-cylinder", R"json({
  "system": "full-shift-2",
  "potential": {},
  "target": {"type": "cylinders", "length": 1, "words": ["0"]},
  "grids": {
    "alpha": [-2, -1, -0.5, 0, 0.2, 0.4, 0.6],
    "u": [0.5, 1, 1.25, 1.5, 2, 2.5, 3, 4, 5, 8],
    "n": [10, 20, 40]
  },
  "checks": {"entrance_set": {"words": ["1"]}, "mc_n": 30, "mc_u": 4}
})json"},
      {"golden-cylinder", R"json({
  "system": "golden-mean",
  "potential": {},
  "target": {"type": "cylinders", "length": 1, "words": ["0"]},
  "grids": {
    "alpha": [-2, -1, -0.5, 0, 0.2, 0.4, 0.6, 1.0],
    "u": [0.5, 1, 1.1, 1.2, 1.3, 1.4, 1.5, 1.7, 1.9, 2, 2.5],
    "n": [10, 20, 40]
  },
  "checks": {"entrance_set": {"words": ["1"]}, "mc_n": 30, "mc_u": 1.6}
})json"},
      {"interval-borel", R"json({
  "system": "full-shift-2",
  "potential": {},
  "target": {"type": "interval", "lo": "0", "hi": "sqrt(1/2)"},
  "grids": {
    "alpha": [-0.5, 0, 0.2],
    "u": [1, 1.2, 1.414, 1.6, 2, 2.5, 3],
    "m": {"start": 4, "stop": 12},
    "n": [10, 20, 40]
  },
  "checks": {"v": 3, "mc_n": 20, "mc_u": 2}
})json"},
  };
  return table;
}

}  // namespace

const CylinderUnion& ExperimentConfig::cylinders() const {
  if (!target.cylinders) throw Error(ErrorKind::ConfigError, "this subcommand needs a cylinder-union target");
  return *target.cylinders;
}

std::unique_ptr<BorelOracle> ExperimentConfig::make_oracle() const {
  switch (target.kind) {
    case TargetKind::cylinders:
      return std::make_unique<CylinderOracle>(system, *target.cylinders);
    case TargetKind::interval: {
      const int base = system.alphabet_size();
      return std::make_unique<IntervalOracle>(NaryThreshold::parse(target.lo, base, target.threshold_depth),
                                              NaryThreshold::parse(target.hi, base, target.threshold_depth));
    }
    case TargetKind::external:
      return std::make_unique<ExternalOracle>(target.command, system.alphabet_size());
  }
  throw Error(ErrorKind::ConfigError, "unknown target kind");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : presets()) out.push_back(k);
  return out;
}

std::string preset_json(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) {
    std::string list;
    for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::ConfigError, "unknown preset '" + std::string(name) + "' (available: " + list + ")");
  }
  return it->second;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::ConfigError, std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                            ": JSON syntax error: " + e.what());
  }
  if (!doc.is_object()) fail("", "top level must be an object");

  ExperimentConfig cfg;
  if (doc.contains("preset")) {
    cfg.preset = get_string(doc["preset"], "/preset");
    json base = json::parse(preset_json(cfg.preset));
    json overrides = doc;
    overrides.erase("preset");
    base.merge_patch(overrides);
    base["preset"] = cfg.preset;
    doc = std::move(base);
  }
  only_keys(doc, "", {"preset", "system", "potential", "target", "grids", "budgets", "seed", "checks"});
  cfg.canonical = doc.dump();

  try {
    if (!doc.contains("system")) fail("/system", "missing");
    cfg.system = parse_system(doc["system"], "/system");
    cfg.potential = doc.contains("potential") ? parse_potential(doc["potential"], "/potential", cfg.system)
                                              : LocalPotential::zero(cfg.system);
    if (!doc.contains("target")) fail("/target", "missing");
    cfg.target = parse_target(doc["target"], "/target", cfg.system);

    if (doc.contains("grids")) {
      const json& g = doc["grids"];
      only_keys(g, "/grids", {"alpha", "alpha_rate", "u", "m", "n"});
      if (g.contains("alpha")) cfg.alphas = get_real_grid(g["alpha"], "/grids/alpha");
      if (g.contains("alpha_rate")) cfg.rate_alphas = get_real_grid(g["alpha_rate"], "/grids/alpha_rate");
      if (g.contains("u")) cfg.us = get_real_grid(g["u"], "/grids/u");
      if (g.contains("m")) cfg.ms = get_int_grid(g["m"], "/grids/m", 1);
      if (g.contains("n")) cfg.ns = get_int_grid(g["n"], "/grids/n", 1);
    }
    if (cfg.alphas.empty()) cfg.alphas = {-1.0, -0.5, 0.0};
    if (cfg.us.empty()) cfg.us = {1.0, 1.5, 2.0, 3.0};
    if (cfg.ms.empty() && cfg.has_oracle_target()) cfg.ms = {4, 6, 8, 10};
    if (cfg.ns.empty()) fail("/grids/n", "must not be empty");

    if (doc.contains("budgets")) {
      const json& b = doc["budgets"];
      only_keys(b, "/budgets", {"state_cap", "dp_budget", "mc_samples"});
      if (b.contains("state_cap")) {
        cfg.budgets.state_cap = static_cast<std::size_t>(get_integer(b["state_cap"], "/budgets/state_cap", 1));
      }
      if (b.contains("dp_budget")) cfg.budgets.dp_budget = get_number(b["dp_budget"], "/budgets/dp_budget");
      if (b.contains("mc_samples")) cfg.budgets.mc_samples = get_integer(b["mc_samples"], "/budgets/mc_samples", 1000);
    }
    if (doc.contains("seed")) {
      const json& s = doc["seed"];
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
        fail("/seed", "expected a non-negative integer");
      }
      cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("checks")) cfg.checks = parse_checks(doc["checks"], "/checks", cfg.system);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    // Domain errors in the model (e.g. NotPrimitive) keep their kind.
    throw Error(e.kind(), std::string(source) + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path_or_preset) {
  if (path_or_preset.starts_with("preset:")) {
    const std::string name = path_or_preset.substr(7);
    return parse_config(json{{"preset", name}}.dump(), path_or_preset);
  }
  std::ifstream in(path_or_preset, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot read config file '" + path_or_preset + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path_or_preset);
}

}  // namespace returnldp
