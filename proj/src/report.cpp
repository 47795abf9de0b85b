#include "returnldp/report.hpp"

#include "returnldp/borel.hpp"
#include "returnldp/deviations.hpp"
#include "returnldp/thermodynamics.hpp"
#include "returnldp/verify.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace returnldp {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view version = "1.0.0";

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::string> units;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
        if (quote) {
          out += '"';
          for (char c : cells[i]) out += c == '"' ? std::string("\"\"") : std::string(1, c);
          out += '"';
        } else {
          out += cells[i];
        }
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }

  ordered_json schema() const {
    ordered_json j = ordered_json::object();
    for (std::size_t i = 0; i < header.size(); ++i) j[header[i]] = units[i];
    return j;
  }
};

// Finite values as numbers; the tags as strings, with a boolean sidecar.
void put_real(ordered_json& j, const std::string& key, const ExtendedReal& x) {
  if (x.is_finite()) {
    j[key] = x.value();
  } else {
    j[key] = x.str();
  }
  j[key + "_is_neg_inf"] = x.is_neg_infinity();
  if (x.is_pos_infinity()) j[key + "_is_pos_inf"] = true;
}

std::string fraction(const CycleMean<long>& c) {
  return std::to_string(c.numerator) + "/" + std::to_string(c.denominator);
}

// Polyline SVG with one panel per curve set.
struct Series {
  std::string label;
  std::vector<double> xs, ys;
};
struct Panel {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
};

std::string svg_plot(const std::vector<Panel>& panels, bool timestamps, const std::string& config_hash) {
  const double pw = 420, ph = 300, margin = 50;
  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pw * static_cast<double>(panels.size())
    << "\" height=\"" << ph << "\">\n<metadata>config " << config_hash;
  if (timestamps) {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    s << " generated " << buf;
  }
  s << "</metadata>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& ser : panel.series) {
      for (std::size_t i = 0; i < ser.xs.size(); ++i) {
        x0 = std::min(x0, ser.xs[i]);
        x1 = std::max(x1, ser.xs[i]);
        y0 = std::min(y0, ser.ys[i]);
        y1 = std::max(y1, ser.ys[i]);
      }
    }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    const double ox = pw * static_cast<double>(p);
    auto X = [&](double x) { return ox + margin + (x - x0) / (x1 - x0) * (pw - 2 * margin); };
    auto Y = [&](double y) { return ph - margin - (y - y0) / (y1 - y0) * (ph - 2 * margin); };
    s << "<g>\n<text x=\"" << ox + pw / 2 << "\" y=\"20\" text-anchor=\"middle\">" << panel.title << "</text>\n";
    s << "<rect x=\"" << ox + margin << "\" y=\"" << margin << "\" width=\"" << pw - 2 * margin << "\" height=\""
      << ph - 2 * margin << "\" fill=\"none\" stroke=\"#888\"/>\n";
    s << "<text x=\"" << ox + pw / 2 << "\" y=\"" << ph - 12 << "\" text-anchor=\"middle\">" << panel.xlabel
      << " [" << x0 << ", " << x1 << "]</text>\n";
    s << "<text x=\"" << ox + 12 << "\" y=\"" << ph / 2 << "\" transform=\"rotate(-90 " << ox + 12 << " " << ph / 2
      << ")\" text-anchor=\"middle\">" << panel.ylabel << " [" << y0 << ", " << y1 << "]</text>\n";
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
      const Series& ser = panel.series[k];
      s << "<polyline fill=\"none\" stroke=\"" << colors[k % 4] << "\" points=\"";
      for (std::size_t i = 0; i < ser.xs.size(); ++i) s << (i ? " " : "") << X(ser.xs[i]) << "," << Y(ser.ys[i]);
      s << "\"><title>" << ser.label << "</title></polyline>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opts;
  RunOutcome outcome;
  ordered_json summary = ordered_json::object();
  ordered_json schemas = ordered_json::object();

  void emit(const std::string& name, const std::string& content) {
    write_atomic(opts.out_dir, name, content);
    outcome.files.push_back(name);
  }
  void emit_table(const std::string& name, const Table& t) {
    emit(name, t.csv());
    schemas[name] = t.schema();
  }
  void emit_json(const std::string& name, const ordered_json& j) { emit(name, j.dump(2) + "\n"); }
  void crosscheck_fail(const std::string& what) { throw Error(ErrorKind::CrosscheckFailed, what); }
};

struct CylinderSetup {
  BlockSft block;
  CylinderUnion R;
  GibbsMarkovMeasure mu;
  CgfSolver solver;
};

CylinderSetup cylinder_setup(const ExperimentConfig& cfg) {
  const CylinderUnion& R = cfg.cylinders();
  BlockSft block = recode(cfg.system, std::max(cfg.potential.span(), R.cylinder_length()), cfg.budgets.state_cap);
  GibbsMarkovMeasure mu = gibbs_measure(block, cfg.potential);
  CgfSolver solver(block, cfg.potential, R);
  return {block, R, std::move(mu), std::move(solver)};
}

ordered_json config_metadata(const ExperimentConfig& cfg, std::string_view sub) {
  ordered_json m;
  m["tool"] = "returnldp";
  m["version"] = version;
  m["subcommand"] = sub;
  m["preset"] = cfg.preset;
  m["config_hash"] = fnv1a_hex(cfg.canonical);
  m["seed"] = cfg.seed;
  return m;
}

// ---------------------------------------------------------------- validate

void run_validate(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  ordered_json j;
  j["valid"] = true;
  j["alphabet_size"] = cfg.system.alphabet_size();
  j["potential_span"] = cfg.potential.span();
  std::vector<std::string> warnings;
  const auto oracle = cfg.make_oracle();
  j["target"] = oracle->describe();
  if (cfg.target.kind == TargetKind::interval) {
    const auto* io = dynamic_cast<const IntervalOracle*>(oracle.get());
    for (const auto* t : {&io->lo(), &io->hi()}) {
      if (!t->warning().empty()) warnings.push_back(t->warning());
    }
  }
  const int audit_len = cfg.ms.empty() ? 8 : cfg.ms.back() + 2;
  audit_refinement(*oracle, cfg.system, audit_len, 10'000, cfg.seed);
  j["refinement_audit"] = {{"samples", 10'000}, {"max_length", audit_len}, {"passed", true}};
  j["warnings"] = warnings;
  ctx.summary["validate"] = j;
  ctx.emit_json("validate.json", j);
}

// ---------------------------------------------------------------- pressure

void run_pressure(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  ordered_json j;
  const int L = cfg.target.cylinders ? std::max(cfg.potential.span(), cfg.target.cylinders->cylinder_length())
                                     : cfg.potential.span();
  const BlockSft block = recode(cfg.system, L, cfg.budgets.state_cap);
  const PerronData pd = perron_data(block, cfg.potential);
  const GibbsMarkovMeasure mu = gibbs_measure(block, cfg.potential);
  j["block_length"] = L;
  j["states"] = block.state_count();
  j["pressure"] = pd.log_pressure;
  j["spectral_radius"] = pd.spectral_radius;

  if (ctx.opts.crosscheck) {
    const Eigen::MatrixXd dense = Eigen::MatrixXd(transfer_matrix(block, cfg.potential));
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(dense, false).eigenvalues();
    double rho = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev(i)));
    const double err = std::abs(std::log(rho) - pd.log_pressure);
    j["pressure_dense_eigensolver"] = std::log(rho);
    j["pressure_abs_err"] = err;
    j["pressure_tolerance"] = 1e-10;
    if (err > 1e-10) ctx.crosscheck_fail("pressure differs from the dense eigensolver by " + format_real(err));
  }

  Table g{{"state", "word", "stationary", "right", "left"}, {"index", "symbols", "probability", "1", "1"}, {}};
  for (std::size_t s = 0; s < block.state_count(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    g.rows.push_back({std::to_string(s), block.state(s).str(), format_real(mu.stationary()(i)),
                      format_real(pd.right(i)), format_real(pd.left(i))});
  }
  ctx.emit_table("gibbs.csv", g);

  if (cfg.target.cylinders) {
    const CylinderUnion& R = *cfg.target.cylinders;
    const DeviationDomain d = deviation_domain(block, cfg.potential, R);
    const ErgodicExtrema ext = max_min_measure(block, R);
    j["measure_R"] = d.measure;
    put_real(j, "dotted_pressure", d.s_critical);
    put_real(j, "alpha_max", d.alpha_max);
    j["max_R"] = ext.max.value();
    j["max_R_fraction"] = fraction(ext.max);
    j["min_R"] = ext.min.value();
    j["min_R_fraction"] = fraction(ext.min);
    put_real(j, "inv_max", d.inv_max);
    put_real(j, "inv_min", d.inv_min);
  }
  ctx.summary["pressure"] = j;
  ctx.emit_json("pressure.json", j);
}

// ---------------------------------------------------------------- cgf

int induced_horizon_for(const DeviationDomain& d, double S, int minimum) {
  if (!d.s_critical.is_finite()) return minimum;
  const double gap = S - d.s_critical.value();
  const double need = std::ceil(std::log(1e12) / gap);
  return static_cast<int>(std::clamp(need, static_cast<double>(minimum), 20000.0));
}

SandwichTable sandwich_for(const ExperimentConfig& cfg, const BorelOracle& oracle, std::vector<double> alphas) {
  ApproxOptions ao;
  ao.state_cap = cfg.budgets.state_cap;
  ao.seed = cfg.seed;
  return sandwich_curves(oracle, cfg.system, cfg.potential, cfg.ms, alphas, ao);
}

void emit_sandwich(Context& ctx, const SandwichTable& table, const std::string& name) {
  Table t{{"m", "alpha", "psi_inner", "psi_outer", "gap", "ordering_ok", "note"},
          {"depth", "1", "nats/return", "nats/return", "nats/return", "bool", "text"},
          {}};
  for (const auto& r : table.rows) {
    t.rows.push_back({std::to_string(r.depth), format_real(r.alpha),
                      r.psi_inner ? format_real(*r.psi_inner) : "", r.psi_outer ? format_real(*r.psi_outer) : "",
                      r.gap ? format_real(*r.gap) : "", fmt_bool(r.ordering_ok), r.note});
  }
  ctx.emit_table(name, t);
}

void run_cgf(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.has_oracle_target()) {
    const auto oracle = cfg.make_oracle();
    const SandwichTable table = sandwich_for(cfg, *oracle, cfg.alphas);
    emit_sandwich(ctx, table, "cgf.csv");
    ctx.summary["cgf"] = {{"rows", table.rows.size()}, {"target", oracle->describe()}};
    return;
  }
  const CylinderSetup cs = cylinder_setup(cfg);
  const CgfCurve curve = cgf_curve(cs.solver, cfg.alphas);
  const bool closed = closed_form_cgf(cfg, 0.0).has_value();

  Table t{{"alpha", "psi"}, {"1", "nats/return"}, {}};
  if (closed) {
    t.header.insert(t.header.end(), {"psi_closed_form", "abs_err"});
    t.units.insert(t.units.end(), {"nats/return", "nats/return"});
  }
  if (ctx.opts.crosscheck) {
    t.header.insert(t.header.end(), {"induced_log_lambda", "induced_abs_err", "induced_horizon"});
    t.units.insert(t.units.end(), {"nats/return", "nats/return", "steps"});
  }
  double max_closed_err = 0.0, max_induced_err = 0.0;
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    const double a = curve.alphas[i], psi = curve.values[i];
    std::vector<std::string> row{format_real(a), format_real(psi)};
    if (closed) {
      const double cf = *closed_form_cgf(cfg, a);
      max_closed_err = std::max(max_closed_err, std::abs(cf - psi));
      row.insert(row.end(), {format_real(cf), format_real(std::abs(cf - psi))});
    }
    if (ctx.opts.crosscheck) {
      const double S = curve.domain.pressure_top - a;
      const int T = induced_horizon_for(curve.domain, S, cfg.checks.induced_horizon);
      const double lam = std::log(induced_eigenvalue(cs.block, cfg.potential, cs.R, S, T));
      max_induced_err = std::max(max_induced_err, std::abs(lam - psi));
      row.insert(row.end(), {format_real(lam), format_real(std::abs(lam - psi)), std::to_string(T)});
    }
    t.rows.push_back(std::move(row));
  }
  if (ctx.opts.crosscheck && closed && max_closed_err > 1e-9) {
    ctx.crosscheck_fail("closed-form CGF error " + format_real(max_closed_err) + " exceeds 1e-9");
  }
  if (ctx.opts.crosscheck && max_induced_err > 1e-6) {
    ctx.crosscheck_fail("induced-operator CGF error " + format_real(max_induced_err) + " exceeds 1e-6");
  }
  ctx.emit_table("cgf.csv", t);
  ordered_json j;
  j["points"] = curve.alphas.size();
  put_real(j, "alpha_max", curve.domain.alpha_max);
  j["invariant_violations"] = curve.invariant_violations();
  if (closed) j["max_abs_err_closed_form"] = max_closed_err;
  if (ctx.opts.crosscheck) j["max_abs_err_induced"] = max_induced_err;
  ctx.summary["cgf"] = j;
}

// ---------------------------------------------------------------- rate

std::vector<double> rate_grid(const ExperimentConfig& cfg, const DeviationDomain& d) {
  std::vector<double> g = cfg.rate_alphas;
  if (g.empty()) {
    const double hi = d.alpha_max.is_finite() ? d.alpha_max.value() * (1.0 - 2e-3) : 8.0;
    for (double a : linspace(-40.0, -4.0, 37)) g.push_back(a);
    for (double a : linspace(-4.0, hi, 241)) g.push_back(a);
    for (double a : cfg.alphas) {
      if (a >= -40.0 && a <= hi) g.push_back(a);
    }
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// Psi sampled on a plain grid; Phi(u) is then the minimum of Psi(a) - a u over it.
struct DenseGrid {
  std::vector<double> alphas, values;
  double legendre(double u) const {
    double best = INFINITY;
    for (std::size_t i = 0; i < alphas.size(); ++i) best = std::min(best, values[i] - alphas[i] * u);
    return best;
  }
};

DenseGrid dense_grid(const CgfCurve& curve, std::size_t states) {
  const double lo = curve.alphas.front(), hi = curve.alphas.back();
  DenseGrid g;
  if (states <= 256) {
    g.alphas = linspace(lo, hi, 4001);
  } else {
    const double knee = std::max(lo, std::min(-4.0, hi - 1.0));
    g.alphas = linspace(lo, knee, 41);
    const auto upper = linspace(knee, hi, 401);
    g.alphas.insert(g.alphas.end(), upper.begin() + 1, upper.end());
  }
  for (double a : g.alphas) g.values.push_back(curve.evaluator(a));
  return g;
}

void emit_rate_table(Context& ctx, const CgfCurve& curve, const RateCurve& rate, const std::string& name,
                     std::size_t states) {
  Table t{{"u", "phi", "phi_is_neg_inf"}, {"steps/return", "nats/return", "bool"}, {}};
  if (ctx.opts.crosscheck) {
    t.header.insert(t.header.end(), {"phi_dense_grid", "dense_abs_err"});
    t.units.insert(t.units.end(), {"nats/return", "nats/return"});
  }
  double worst = 0.0;
  const DenseGrid grid = ctx.opts.crosscheck ? dense_grid(curve, states) : DenseGrid{};
  for (std::size_t i = 0; i < rate.us.size(); ++i) {
    const ExtendedReal& v = rate.values[i];
    std::vector<std::string> row{format_real(rate.us[i]), format_real(v), fmt_bool(v.is_neg_infinity())};
    if (ctx.opts.crosscheck) {
      if (v.is_finite()) {
        const double dense = grid.legendre(rate.us[i]);
        worst = std::max(worst, std::abs(dense - v.value()));
        row.insert(row.end(), {format_real(dense), format_real(std::abs(dense - v.value()))});
      } else {
        row.insert(row.end(), {"", ""});
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (ctx.opts.crosscheck && worst > 1e-3) {
    ctx.crosscheck_fail("Legendre transform differs from the dense-grid minimum by " + format_real(worst));
  }
  ctx.emit_table(name, t);
}

void run_rate(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::string hash = fnv1a_hex(cfg.canonical);
  if (cfg.has_oracle_target()) {
    const auto oracle = cfg.make_oracle();
    ApproxOptions ao;
    ao.state_cap = cfg.budgets.state_cap;
    ao.seed = cfg.seed;
    const ApproxFamily fam = build_approximations(*oracle, cfg.system, cfg.potential, cfg.ms.back(), ao);
    std::vector<Panel> panels{{"Psi of B_m and C_m", "alpha", "Psi", {}}, {"Phi of B_m and C_m", "u", "Phi", {}}};
    ordered_json j;
    for (const auto& [label, set] : {std::pair{"inner", &fam.inner}, std::pair{"outer", &fam.outer}}) {
      if (set->empty()) continue;
      const CgfSolver solver(fam.measure.block(), cfg.potential, *set);
      const CgfCurve curve = cgf_curve(solver, rate_grid(cfg, solver.domain()));
      const RateCurve rate = legendre_transform(curve, cfg.us);
      emit_rate_table(ctx, curve, rate, std::string("rate_") + label + ".csv", fam.measure.block().state_count());
      Series ps{label, {}, {}}, fs{label, {}, {}};
      for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        if (curve.alphas[i] >= -5.0) {
          ps.xs.push_back(curve.alphas[i]);
          ps.ys.push_back(curve.values[i]);
        }
      }
      for (std::size_t i = 0; i < rate.us.size(); ++i) {
        if (rate.values[i].is_finite()) {
          fs.xs.push_back(rate.us[i]);
          fs.ys.push_back(rate.values[i].value());
        }
      }
      panels[0].series.push_back(ps);
      panels[1].series.push_back(fs);
      j[label] = {{"invariant_violations", rate.invariant_violations()}, {"zero_at", rate.zero_at}};
    }
    ctx.emit("rate.svg", svg_plot(panels, ctx.opts.timestamps, hash));
    j["m"] = fam.depth;
    ctx.summary["rate"] = j;
    return;
  }
  const CylinderSetup cs = cylinder_setup(cfg);
  const CgfCurve curve = cgf_curve(cs.solver, rate_grid(cfg, cs.solver.domain()));
  const RateCurve rate = legendre_transform(curve, cfg.us);
  emit_rate_table(ctx, curve, rate, "rate.csv", cs.block.state_count());

  Panel p1{"Psi(alpha)", "alpha", "Psi", {{"Psi", {}, {}}}};
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    if (curve.alphas[i] >= -5.0) {
      p1.series[0].xs.push_back(curve.alphas[i]);
      p1.series[0].ys.push_back(curve.values[i]);
    }
  }
  Panel p2{"Phi(u)", "u", "Phi", {{"Phi", {}, {}}}};
  for (std::size_t i = 0; i < rate.us.size(); ++i) {
    if (rate.values[i].is_finite()) {
      p2.series[0].xs.push_back(rate.us[i]);
      p2.series[0].ys.push_back(rate.values[i].value());
    }
  }
  ctx.emit("rate.svg", svg_plot({p1, p2}, ctx.opts.timestamps, hash));
  ordered_json j;
  j["zero_at"] = rate.zero_at;
  put_real(j, "inv_max", rate.inv_max);
  put_real(j, "inv_min", rate.inv_min);
  j["cgf_grid_points"] = curve.alphas.size();
  j["invariant_violations"] = rate.invariant_violations();
  ctx.summary["rate"] = j;
}

// ---------------------------------------------------------------- approx

void run_approx(Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  if (cfg.ms.empty()) throw Error(ErrorKind::ConfigError, "field '/grids/m': approx needs at least one depth");
  const auto oracle = cfg.make_oracle();
  const SandwichTable table = sandwich_for(cfg, *oracle, cfg.alphas);

  Table f{{"m", "words_inner", "words_outer", "words_boundary", "mass_inner", "mass_outer", "mass_boundary",
           "max_boundary", "max_boundary_fraction", "min_boundary", "alpha_inner", "alpha_inner_is_pos_inf",
           "alpha_outer", "alpha_outer_is_pos_inf"},
          {"depth", "count", "count", "count", "probability", "probability", "probability", "frequency", "ratio",
           "frequency", "nats/step", "bool", "nats/step", "bool"},
          {}};
  if (ctx.opts.crosscheck) {
    f.header.insert(f.header.end(), {"mass_boundary_word_sum", "mass_boundary_abs_err"});
    f.units.insert(f.units.end(), {"probability", "probability"});
  }
  for (const auto& fam : table.families) {
    const ApproxStats& s = fam.stats;
    std::vector<std::string> row{std::to_string(fam.depth), std::to_string(fam.inner.size()),
                                 std::to_string(fam.outer.size()), std::to_string(fam.boundary.size()),
                                 format_real(s.mass_inner), format_real(s.mass_outer), format_real(s.mass_boundary),
                                 s.max_boundary ? format_real(s.max_boundary->value()) : "",
                                 s.max_boundary ? fraction(*s.max_boundary) : "",
                                 s.min_boundary ? format_real(s.min_boundary->value()) : "",
                                 format_real(s.alpha_inner), fmt_bool(s.alpha_inner.is_pos_infinity()),
                                 format_real(s.alpha_outer), fmt_bool(s.alpha_outer.is_pos_infinity())};
    if (ctx.opts.crosscheck) {
      double sum = 0.0;
      for (const Word& w : fam.boundary.words()) sum += fam.measure.word_measure(w);
      const double err = std::abs(sum - s.mass_boundary);
      if (err > 1e-12) ctx.crosscheck_fail("boundary mass differs from the word sum by " + format_real(err));
      row.insert(row.end(), {format_real(sum), format_real(err)});
    }
    f.rows.push_back(std::move(row));
  }
  ctx.emit_table("approx_families.csv", f);
  emit_sandwich(ctx, table, "sandwich.csv");

  ordered_json decay;
  try {
    const DecayFit fit = decay_fit(table.families);
    put_real(decay, "theta_hat", fit.theta_hat);
    decay["c_hat"] = fit.c_hat;
    put_real(decay, "implied_gap", fit.implied_gap);
    put_real(decay, "implied_pressure_bound", fit.implied_pressure_bound);
    decay["residuals"] = fit.residuals;
    decay["no_gap_evidence"] = fit.no_gap_evidence;
    decay["masses"] = fit.masses;
    decay["depths"] = fit.depths;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
    decay["error"] = std::string(error_name(e.kind()));
    decay["message"] = e.what();
  }
  ctx.emit_json("decay.json", decay);

  Table dm{{"m", "max_boundary", "inv_max_boundary", "v", "criterion", "slope_at_minus_40", "slope_error", "slope_ok"},
           {"depth", "frequency", "steps/return", "steps/return", "bool", "steps/return", "steps/return", "bool"},
           {}};
  for (const auto& fam : table.families) {
    if (fam.boundary.empty()) continue;
    const DmReport r = dm_diagnostics(fam, cfg.checks.v);
    dm.rows.push_back({std::to_string(r.depth), format_real(r.max_boundary.value()),
                       format_real(1.0 / r.max_boundary.value()), format_real(r.v), fmt_bool(r.criterion),
                       format_real(r.slope_at_minus_40), format_real(r.slope_error), fmt_bool(r.slope_ok)});
  }
  ctx.emit_table("dm.csv", dm);
  ctx.summary["approx"] = {{"depths", cfg.ms}, {"target", oracle->describe()}, {"decay", decay}};
}

// ---------------------------------------------------------------- verify

struct Checker {
  std::vector<InvariantResult>& out;

  void add(std::string name, double value, double limit, bool passed, std::string detail = "") {
    out.push_back({std::move(name), format_real(value), format_real(limit), passed, std::move(detail)});
  }
  void add_text(std::string name, std::string value, std::string limit, bool passed, std::string detail = "") {
    out.push_back({std::move(name), std::move(value), std::move(limit), passed, std::move(detail)});
  }
  template <class F>
  void guarded(const std::string& name, F f) {
    try {
      f();
    } catch (const Error& e) {
      add_text(name, std::string(error_name(e.kind())), "", false, e.what());
    }
  }
};

std::string join(const std::vector<double>& xs) {
  std::string s;
  for (double x : xs) s += (s.empty() ? "" : " ") + format_real(x);
  return s;
}

void verify_cylinders(const ExperimentConfig& cfg, Checker& ck) {
  const CylinderSetup cs = cylinder_setup(cfg);
  const GibbsMarkovMeasure& mu = cs.mu;
  const CylinderUnion& R = cs.R;
  const DeviationDomain& dom = cs.solver.domain();
  const CgfSolver& psi = cs.solver;
  DpOptions dp;
  dp.budget = cfg.budgets.dp_budget;

  ck.guarded("dp_mass_conservation", [&] {
    const auto d = return_distribution(mu, R, 3, 64, StartMode::full_space, nullptr, dp);
    ck.add("dp_mass_conservation", d.mass_defect(), 1e-12, d.mass_defect() <= 1e-12);
  });

  if (closed_form_cgf(cfg, 0.0)) {
    ck.guarded("dp_geometric_law", [&] {
      const auto d = return_distribution(mu, R, 1, 64, StartMode::full_space, nullptr, dp);
      const double q = dom.measure;
      double worst = 0.0;
      for (int t = 1; t <= 64; ++t) worst = std::max(worst, std::abs(d.probs[t] - q * std::pow(1.0 - q, t - 1)));
      ck.add("dp_geometric_law", worst, 1e-12, worst <= 1e-12);
    });
  }

  for (double a : cfg.alphas) {
    if (a == 0.0) continue;
    const std::string tag = "(alpha=" + format_real(a) + ")";
    ck.guarded("dp_vs_spectral" + tag, [&] {
      const double spectral = psi(a);
      std::vector<double> gaps;
      for (int n : cfg.ns) {
        const EmpiricalCgf e = empirical_cgf_auto(mu, R, n, a, StartMode::full_space, nullptr, 1e-10, dp);
        gaps.push_back(std::abs(e.value - spectral));
        const double exact = exact_mgf_rate(mu, R, n, a);
        const double err = std::abs(e.value - exact);
        ck.add("dp_vs_exact_mgf" + tag + "(n=" + std::to_string(n) + ")", err, e.truncation_bound + 1e-9,
               err <= e.truncation_bound + 1e-9);
      }
      const GapSequence g = make_gap_sequence(cfg.ns, gaps, 0.02);
      ck.add("dp_vs_spectral" + tag, gaps.back(), 0.02, g.decreasing && g.small, "gaps " + join(gaps));
    });
  }

  ck.guarded("kac_derivative", [&] {
    const double h = 1e-4;
    const double slope = (psi(h) - psi(-h)) / (2 * h);
    const double err = std::abs(slope - 1.0 / dom.measure);
    ck.add("kac_derivative", err, 1e-5, err <= 1e-5, "slope " + format_real(slope));
  });
  ck.guarded("asymptotic_slope", [&] {
    const double slope = psi(-39.0) - psi(-40.0);
    const double err = std::abs(slope - dom.inv_max.value());
    ck.add("asymptotic_slope", err, 1e-4, err <= 1e-4, "slope " + format_real(slope));
  });
  for (double a : cfg.checks.duality_alphas) {
    if (dom.alpha_max.is_finite() && a >= dom.alpha_max.value()) continue;
    const std::string name = "induced_duality(alpha=" + format_real(a) + ")";
    ck.guarded(name, [&] {
      const double lam =
          induced_eigenvalue(cs.block, cfg.potential, R, dom.pressure_top - a, cfg.checks.induced_horizon);
      const double err = std::abs(std::exp(psi(a)) - lam);
      ck.add(name, err, 1e-6, err <= 1e-6);
    });
  }

  CgfCurve curve = cgf_curve(psi, rate_grid(cfg, dom));
  const auto cv = curve.invariant_violations();
  ck.add_text("cgf_curve_invariants", std::to_string(cv.size()), "0", cv.empty(), cv.empty() ? "" : cv.front());
  const RateCurve rate = legendre_transform(curve, cfg.us);
  const auto rv = rate.invariant_violations();
  ck.add_text("rate_curve_invariants", std::to_string(rv.size()), "0", rv.empty(), rv.empty() ? "" : rv.front());

  const CylinderUnion Rc = R.complement(cfg.system);
  if (!Rc.empty()) {
    ck.guarded("complement_formula", [&] {
      const CgfSolver psi_c(cs.block, cfg.potential, Rc);
      const CgfCurve curve_c = cgf_curve(psi_c, rate_grid(cfg, psi_c.domain()));
      const RateCurve rate_c = legendre_transform(curve_c, linspace(1.0005, 12.0, 4000));
      const RateCurve direct = legendre_transform(curve, cfg.checks.complement_us);
      const RateCurve via = complement_rate(rate_c, cfg.checks.complement_us);
      double worst = 0.0;
      for (std::size_t i = 0; i < direct.us.size(); ++i) {
        const ExtendedReal a = direct.values[i], b = via.values[i];
        if (a.is_finite() != b.is_finite()) {
          worst = INFINITY;
        } else if (a.is_finite()) {
          worst = std::max(worst, std::abs(a.value() - b.value()));
        }
      }
      ck.add("complement_formula", worst, 1e-3, worst <= 1e-3);
    });
  }

  const CylinderUnion S = cfg.checks.entrance_set ? *cfg.checks.entrance_set : Rc;
  if (!S.empty()) {
    ck.guarded("entrance_vs_return", [&] {
      const auto rep = entrance_vs_return_check(mu, R, S, cfg.checks.entrance_ns, cfg.checks.entrance_alpha);
      ck.add("entrance_vs_return", rep.gaps.gaps.back(), 0.05, rep.gaps.passed(),
             "gaps " + join(rep.gaps.gaps) + (rep.gaps.decreasing ? "" : " (not monotone)"));
    });
  }
  ck.guarded("concentration_stated", [&] {
    const auto rep = concentration_check(mu, R, cfg.checks.concentration_alpha, cfg.checks.concentration_delta,
                                         cfg.ns, cfg.checks.concentration_margin);
    for (const auto* v : {&rep.stated, &rep.proof}) {
      ck.add("concentration_" + v->name, v->gaps.gaps.back(), 0.02, v->gaps.passed(),
             "tau " + format_real(v->tau) + ", relative gaps " + join(v->gaps.gaps));
    }
  });
  ck.guarded("gibbs_bound", [&] {
    const auto rep = gibbs_bound_check(mu, std::max(cfg.checks.gibbs_n_max, cs.block.block_length() + 2));
    ck.add("gibbs_bound_stable", rep.b_hat.back() - rep.b_hat[rep.b_hat.size() - 3], 1e-9, rep.stable,
           "b_hat " + format_real(rep.b_hat.back()));
  });

  const int n = cfg.checks.mc_n;
  const double u = cfg.checks.mc_u;
  ck.guarded("dp_tail_vs_legendre", [&] {
    const ExtendedReal leg = interpolate(legendre_transform(curve, std::vector<double>{u}), u);
    std::vector<double> gaps;
    for (int m : cfg.ns) {
      const ExtendedReal tail = exact_tail(mu, R, m, u, dp);
      gaps.push_back(leg.is_finite() && tail.is_finite() ? std::abs(tail.value() - leg.value()) : INFINITY);
    }
    const GapSequence g = make_gap_sequence(cfg.ns, gaps, 0.02);
    ck.add("dp_tail_vs_legendre_convergence(u=" + format_real(u) + ")", gaps.back(), gaps.front(), g.decreasing,
           "gaps " + join(gaps));
    ck.add("dp_tail_vs_legendre_at_largest_n(u=" + format_real(u) + ")", gaps.back(), 0.02, g.small,
           "finite-n tail carries an O(log n / n) prefactor");
  });
  ck.guarded("mc_tail", [&] {
    McOptions mo;
    mo.samples = cfg.budgets.mc_samples;
    mo.seed = cfg.seed;
    const McEstimate est = mc_tail(mu, R, n, u, mo);
    const ExtendedReal dp_tail = exact_tail(mu, R, n, u, dp);
    const ExtendedReal leg = interpolate(legendre_transform(curve, std::vector<double>{u}), u);
    const std::string detail = "estimate " + format_real(est.value) + " +- " + format_real(est.ci_half_width) +
                               ", hits " + std::to_string(est.hits) + (est.note.empty() ? "" : ", " + est.note);
    auto within = [&](const ExtendedReal& ref) {
      return est.value.is_finite() && ref.is_finite() &&
             std::abs(est.value.value() - ref.value()) <= 2 * est.ci_half_width;
    };
    ck.add_text("mc_vs_dp_tail(n=" + std::to_string(n) + ",u=" + format_real(u) + ")", format_real(est.value),
                format_real(dp_tail), within(dp_tail), detail);
    ck.add_text("mc_vs_legendre(n=" + std::to_string(n) + ",u=" + format_real(u) + ")", format_real(est.value),
                format_real(leg), within(leg), detail);
  });
}

void verify_oracle(const ExperimentConfig& cfg, Checker& ck) {
  const auto oracle = cfg.make_oracle();
  ck.guarded("oracle_refinement_audit", [&] {
    audit_refinement(*oracle, cfg.system, cfg.ms.back() + 2, 10'000, cfg.seed);
    ck.add_text("oracle_refinement_audit", "passed", "", true);
  });
  const SandwichTable table = sandwich_for(cfg, *oracle, cfg.alphas);
  const auto& fams = table.families;

  bool nested = true, alpha_mono = true, mass_mono = true, max_mono = true;
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const auto& f = fams[i];
    for (const Word& w : f.inner.words()) nested = nested && f.outer.contains_prefix(w);
    if (ExtendedReal(f.stats.alpha_inner) > f.stats.alpha_outer) alpha_mono = false;
    if (i == 0) continue;
    const auto& p = fams[i - 1];
    if (f.depth > p.depth) {
      const CylinderUnion refined = p.inner.refined(cfg.system, f.depth);
      for (const Word& w : refined.words()) nested = nested && f.inner.contains_prefix(w);
      for (const Word& w : f.outer.words()) nested = nested && p.outer.contains_prefix(w);
    }
    if (f.stats.alpha_inner < p.stats.alpha_inner || f.stats.alpha_outer > p.stats.alpha_outer) alpha_mono = false;
    if (f.stats.mass_boundary > p.stats.mass_boundary + 1e-15) mass_mono = false;
    if (f.stats.max_boundary && p.stats.max_boundary && f.stats.max_boundary->value() > p.stats.max_boundary->value()) {
      max_mono = false;
    }
  }
  ck.add_text("set_sandwich_nested", fmt_bool(nested), "true", nested);
  ck.add_text("alpha_monotone", fmt_bool(alpha_mono), "true", alpha_mono);
  ck.add_text("boundary_mass_non_increasing", fmt_bool(mass_mono), "true", mass_mono);
  ck.add_text("max_boundary_non_increasing", fmt_bool(max_mono), "true", max_mono);

  bool ordering = true;
  for (const auto& r : table.rows) ordering = ordering && r.ordering_ok;
  ck.add_text("sandwich_ordering", fmt_bool(ordering), "true", ordering);
  for (double a : cfg.alphas) {
    if (a == 0.0) continue;
    std::vector<double> gaps;
    for (const auto& r : table.rows) {
      if (r.alpha == a) gaps.push_back(r.gap ? *r.gap : INFINITY);
    }
    const GapSequence g = make_gap_sequence(cfg.ms, gaps, 0.05);
    ck.add("sandwich_gap(alpha=" + format_real(a) + ")", gaps.back(), 0.05, g.decreasing && g.small,
           "gaps " + join(gaps));
  }
  ck.guarded("decay_fit", [&] {
    const DecayFit fit = decay_fit(fams);
    ck.add_text("decay_fit_theta_hat", format_real(fit.theta_hat), ">= 0", true,
                "c_hat " + format_real(fit.c_hat) + (fit.no_gap_evidence ? ", no pressure gap evidence" : ""));
  });
  for (const auto& f : fams) {
    if (f.boundary.empty()) continue;
    const std::string name = "dm_slope(m=" + std::to_string(f.depth) + ")";
    ck.guarded(name, [&] {
      const DmReport r = dm_diagnostics(f, cfg.checks.v);
      ck.add(name, r.slope_error, 1e-4, r.slope_ok,
             "max(D_m) " + fraction(r.max_boundary) + ", criterion 1/max > v: " + fmt_bool(r.criterion));
    });
  }

  const ApproxFamily& last = fams.back();
  if (!last.inner.empty()) {
    DpOptions dp;
    dp.budget = cfg.budgets.dp_budget;
    for (double a : cfg.alphas) {
      if (a == 0.0) continue;
      const std::string name = "finite_n_sandwich(alpha=" + format_real(a) + ")";
      ck.guarded(name, [&] {
        bool ok = true;
        std::string detail;
        for (int n : cfg.ns) {
          const double b = empirical_cgf_auto(last.measure, last.inner, n, a, StartMode::full_space, nullptr, 1e-10, dp).value;
          const double c = empirical_cgf_auto(last.measure, last.outer, n, a, StartMode::full_space, nullptr, 1e-10, dp).value;
          ok = ok && (a > 0 ? c <= b + 1e-9 : c >= b - 1e-9);
          detail += "n=" + std::to_string(n) + ": B " + format_real(b) + " C " + format_real(c) + "; ";
        }
        ck.add_text(name, fmt_bool(ok), "true", ok, detail);
      });
    }
    ck.guarded("return_time_domination", [&] {
      const DominationReport rep = sandwich_domination(last, *oracle, cfg.ns.back(), 1000, cfg.seed);
      ck.add("return_time_domination", static_cast<double>(rep.violations), 0.0, rep.violations == 0,
             std::to_string(rep.samples) + " orbits, " + std::to_string(rep.undecided) + " undecided visits");
    });
    ck.guarded("mc_oracle_tail", [&] {
      McOptions mo;
      mo.samples = std::min<long>(cfg.budgets.mc_samples, 100'000);
      mo.seed = cfg.seed;
      const double mean = 2.0 / (last.stats.mass_inner + last.stats.mass_outer);
      const McEstimate est =
          mc_tail(last.measure, *oracle, mean, last.depth, cfg.checks.mc_n, cfg.checks.mc_u, mo);
      const TailEvent ev = tail_event(mean, cfg.checks.mc_n, cfg.checks.mc_u);
      // r_B >= r_A >= r_C orders the tail probabilities of either event.
      const ExtendedReal tb = exact_tail(last.measure, last.inner, cfg.checks.mc_n, cfg.checks.mc_u, dp);
      const ExtendedReal tc = exact_tail(last.measure, last.outer, cfg.checks.mc_n, cfg.checks.mc_u, dp);
      const bool at_least = ev.direction == TailDirection::at_least;
      const ExtendedReal lo = at_least ? tc : tb, hi = at_least ? tb : tc;
      const bool ok = est.value.is_finite() && lo.as_double() - 2 * est.ci_half_width <= est.value.value() &&
                      est.value.value() <= hi.as_double() + 2 * est.ci_half_width;
      ck.add_text("mc_oracle_tail_between_dp_bounds", format_real(est.value),
                  "[" + format_real(lo) + ", " + format_real(hi) + "]", ok,
                  "+- " + format_real(est.ci_half_width) + (est.note.empty() ? "" : ", " + est.note));
    });
  }
}

void run_verify(Context& ctx) {
  Checker ck{ctx.outcome.invariants};
  if (ctx.cfg.has_oracle_target()) {
    verify_oracle(ctx.cfg, ck);
  } else {
    verify_cylinders(ctx.cfg, ck);
  }
  Table t{{"invariant", "value", "limit", "passed", "detail"}, {"name", "mixed", "mixed", "bool", "text"}, {}};
  ordered_json arr = ordered_json::array();
  std::size_t failed = 0;
  for (const auto& r : ctx.outcome.invariants) {
    t.rows.push_back({r.name, r.value, r.limit, fmt_bool(r.passed), r.detail});
    arr.push_back({{"invariant", r.name}, {"value", r.value}, {"limit", r.limit}, {"passed", r.passed},
                   {"detail", r.detail}});
    if (!r.passed) ++failed;
  }
  ctx.emit_table("verify.csv", t);
  ctx.emit_json("verify.json", arr);
  ctx.summary["verify"] = {{"invariants", ctx.outcome.invariants.size()}, {"failed", failed}};
  if (failed > 0) ctx.outcome.exit_code = 1;
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  if (x == 0.0) x = 0.0;
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string format_real(const ExtendedReal& x) { return x.str(); }

std::optional<double> closed_form_cgf(const ExperimentConfig& cfg, double alpha) {
  if (!cfg.target.cylinders || cfg.target.cylinders->cylinder_length() != 1) return std::nullopt;
  const int N = cfg.system.alphabet_size();
  if (cfg.system.transitions().count() != N * N) return std::nullopt;
  const auto& vals = cfg.potential.values();
  for (const auto& [w, v] : vals) {
    if (v != vals.begin()->second) return std::nullopt;
  }
  const double k = static_cast<double>(cfg.target.cylinders->size());
  const double arg = (N * std::exp(-alpha) - (N - k)) / k;
  if (!(arg > 0.0)) return std::nullopt;
  return -std::log(arg);
}

void write_atomic(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::ConfigError, "cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto target = dir / name;
  const auto tmp = dir / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::ConfigError, "write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::ConfigError, "cannot rename onto '" + target.string() + "': " + ec.message());
}

std::vector<std::string> subcommand_names() { return {"validate", "pressure", "cgf", "rate", "approx", "verify", "report"}; }

std::string error_json(ErrorKind kind, std::string_view message, std::string_view subcommand) {
  ordered_json j;
  j["error"] = error_name(kind);
  j["message"] = message;
  j["subcommand"] = subcommand;
  j["exit_code"] = exit_code_for(kind);
  return j.dump();
}

RunOutcome run_subcommand(std::string_view name, const ExperimentConfig& cfg, const RunOptions& opts) {
  Context ctx{cfg, opts, {}};
  ctx.summary["metadata"] = config_metadata(cfg, name);
  if (name == "validate") {
    run_validate(ctx);
  } else if (name == "pressure") {
    run_pressure(ctx);
  } else if (name == "cgf") {
    run_cgf(ctx);
  } else if (name == "rate") {
    run_rate(ctx);
  } else if (name == "approx") {
    run_approx(ctx);
  } else if (name == "verify") {
    run_verify(ctx);
  } else if (name == "report") {
    run_validate(ctx);
    run_pressure(ctx);
    run_cgf(ctx);
    run_rate(ctx);
    if (!cfg.ms.empty()) run_approx(ctx);
    run_verify(ctx);
  } else {
    throw Error(ErrorKind::ConfigError, "unknown subcommand '" + std::string(name) + "'");
  }
  ctx.summary["tables"] = ctx.schemas;
  ctx.summary["files"] = ctx.outcome.files;
  write_atomic(opts.out_dir, "summary.json", ctx.summary.dump(2) + "\n");
  ctx.outcome.files.push_back("summary.json");
  return ctx.outcome;
}

}  // namespace returnldp
