#include "chlat/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "chlat/classifier.hpp"
#include "chlat/spectrum.hpp"

namespace chlat {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateLattice:
    case ErrorCode::InvalidConcentration:
    case ErrorCode::InvalidParameter:
    case ErrorCode::NonpositiveGamma3:
    case ErrorCode::ZeroMode:
    case ErrorCode::WrongMultiplicity:
    case ErrorCode::IoFailure:
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::CardinalityOutOfModel:
    case ErrorCode::PesViolation:
    case ErrorCode::ResonantDenominator:
    case ErrorCode::UnsupportedCase:
    case ErrorCode::DegenerateCoefficients:
    case ErrorCode::PreTransition:
      return 3;
    case ErrorCode::QuadratureUnderResolved:
    case ErrorCode::BlowUp:
    case ErrorCode::NotConverged:
    case ErrorCode::UnderResolved:
      return 4;
  }
  return 4;
}

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vec(const Vec2& v) { return json::array({num(v.x), num(v.y)}); }

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

json index(const WaveIndex& n) { return json::array({n.n1, n.n2}); }

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Everything derived from the config before any dynamics.
struct Analysis {
  DualLattice dual;
  LatticeSpec cell;
  CriticalSet cs;
  ModelParams params;
  ReducedCoefficients rc;
  TransitionVerdict verdict;
  std::vector<LineReport> lines;
  StabilityReport stability;
  std::optional<PesReport> pes;
  std::string pes_message;
  json report;
};

Analysis analyze(const RunConfig& c) {
  Analysis a;
  if (c.has_k) {
    a.dual = c.dual;
    a.cell = physical_lattice(a.dual);
  } else {
    a.cell = c.lattice;
    a.dual = dual_lattice(a.cell);
  }
  a.cs = c.shell.empty() ? minimal_shell(a.dual, c.sigma) : prescribed_shell(a.dual, c.shell, c.sigma);
  require_in_model(a.cs);
  double lambda = c.lambda_auto ? a.cs.lambda0 * c.lambda_factor : c.lambda;
  a.params = {lambda, c.gamma2, c.gamma3, c.sigma, c.even};
  try {
    a.pes = verify_pes(a.cs, a.dual, [&](double l) {
      ModelParams p = a.params;
      p.lambda = l;
      return p;
    });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PesViolation) throw;
    a.pes_message = e.what();
  }
  a.rc = reduced_coefficients(a.cs, a.dual, a.params, LambdaMode::Critical);
  a.verdict = classify(a.rc, a.params);
  a.lines = straight_line_report(a.rc);
  a.stability = stability_report(a.rc);

  json& r = a.report;
  r["lattice"] = {{"l1", vec(a.cell.l1)}, {"l2", vec(a.cell.l2)}, {"k1", vec(a.dual.k1)},
                  {"k2", vec(a.dual.k2)}, {"cell_area", num(a.cell.cell_area())}};
  r["params"] = {{"lambda", num(lambda)},
                 {"lambda_auto", c.lambda_auto},
                 {"lambda_factor", c.lambda_auto ? num(c.lambda_factor) : json(nullptr)},
                 {"gamma2", num(c.gamma2)},
                 {"gamma3", num(c.gamma3)},
                 {"sigma", num(c.sigma)},
                 {"even", c.even}};
  json members = json::array(), reps = json::array(), kc = json::array();
  for (const auto& n : a.cs.members) members.push_back(index(n));
  for (const auto& n : a.cs.representatives) reps.push_back(index(n));
  for (const auto& v : a.cs.critical_vectors) kc.push_back(vec(v));
  r["critical_set"] = {{"members", members},
                       {"representatives", reps},
                       {"critical_vectors", kc},
                       {"multiplicity", a.cs.multiplicity},
                       {"resonance", resonance_name(a.cs.resonance)},
                       {"norm2", num(a.cs.norm2)},
                       {"lambda0", num(a.cs.lambda0)},
                       {"certified_minimal", a.cs.certified_minimal}};
  if (a.pes) {
    r["pes"] = {{"passed", true},
                {"worst_on_shell", num(a.pes->worst_on_shell)},
                {"max_off_shell", num(a.pes->max_off_shell)},
                {"max_off_index", index(a.pes->max_off_index)},
                {"min_flip", num(a.pes->min_flip)},
                {"message", ""}};
  } else {
    r["pes"] = {{"passed", false}, {"worst_on_shell", nullptr}, {"max_off_shell", nullptr},
                {"max_off_index", nullptr}, {"min_flip", nullptr}, {"message", a.pes_message}};
  }
  const auto& rc = a.rc;
  r["reduction"] = {{"case", case_name(rc.reduction_case)},
                    {"beta", num(rc.beta)},
                    {"xi", num(rc.xi)},
                    {"eta", num(rc.eta)},
                    {"chi", num(rc.chi)},
                    {"omega", num(rc.omega)},
                    {"tau", num(rc.tau)},
                    {"a_constant", num(rc.a_constant)},
                    {"norm2", num(rc.norm2)},
                    {"lambda_manifold", num(rc.lambda_manifold)},
                    {"pairs", rc.pairs}};
  r["verdict"] = {{"transition_type", transition_name(a.verdict.transition_type)},
                  {"threshold", num(a.verdict.threshold)},
                  {"margin", num(a.verdict.margin)},
                  {"notes", a.verdict.notes}};
  json lines = json::array();
  for (const auto& l : a.lines) {
    lines.push_back({{"id", l.id}, {"coefficients", nums(l.coefficients)}, {"order", l.order},
                     {"flow", flow_name(l.flow)}});
  }
  r["straight_lines"] = lines;
  json states = json::array();
  for (const auto& e : a.stability.states) {
    json dirs = json::array();
    for (const auto& d : e.unstable_directions) dirs.push_back(nums(d));
    states.push_back({{"label", e.label},
                      {"coordinates", nums(e.coordinates)},
                      {"pattern", pattern_name(e.pattern)},
                      {"eigenvalues", nums(e.jacobian_eigenvalues)},
                      {"stability", stability_name(e.stability)},
                      {"unstable_count", e.unstable_count},
                      {"unstable_directions", dirs},
                      {"far_field", e.far_field},
                      {"near_origin", e.near_origin}});
  }
  const auto& rr = a.stability.rolls;
  r["equilibria"] = {{"pre_transition", a.stability.pre_transition},
                     {"validity_radius", num(validity_radius(rc))},
                     {"states", states},
                     {"notes", a.stability.notes},
                     {"roll_regime",
                      {{"available", rr.available}, {"lower", num(rr.lower)}, {"upper", num(rr.upper)},
                       {"regime", rr.regime}}}};
  return a;
}

json envelope(const std::string& command) { return {{"schema_version", "1"}, {"command", command}}; }

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path("out") : fs::path(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw Error(ErrorCode::IoFailure, "cannot create output directory " + p.string());
  return p;
}

const Equilibrium& find_state(const Analysis& a, const std::string& label) {
  for (const auto& e : a.stability.states)
    if (e.label == label) return e;
  std::string known;
  for (const auto& e : a.stability.states) known += (known.empty() ? "" : ", ") + e.label;
  throw Error(ErrorCode::ConfigError, "no equilibrium '" + label + "' at these parameters (have: " + known + ")");
}

std::vector<double> reduced_state_of(const SpectralField& f, const Analysis& a) {
  std::vector<double> s;
  for (const auto& n : a.cs.representatives) {
    auto z = f.in_range(n) ? f.at(n) : std::complex<double>{};
    if (a.rc.reduction_case == ReductionCase::Mult6ResonantEven) {
      s.push_back(2.0 * z.real());
    } else {
      s.push_back(z.real());
      s.push_back(z.imag());
    }
  }
  return s;
}

std::string csv_row(double t, const std::vector<double>& v, const double* tail = nullptr) {
  std::string row = fmt(t);
  for (double x : v) row += "," + fmt(x);
  if (tail) row += "," + fmt(*tail);
  return row + "\n";
}

json cmd_simulate(const RunConfig& c, const Analysis& a, const fs::path& dir, const std::string& stem) {
  SimConfig sim = c.sim;
  if (sim.init == InitKind::FromEquilibrium) sim.init_equilibrium = find_state(a, c.init_label);
  if (sim.init == InitKind::Explicit) {
    DualLattice fd;
    sim.init_field = read_field_file(c.init_file, &fd);
  }
  SimResult res = run_pde(sim, a.dual, a.params, a.cs);

  json files = json::array();
  std::string hist;
  std::string head = "t";
  for (std::size_t p = 0; p < a.cs.representatives.size(); ++p) head += ",amplitude" + std::to_string(p + 1);
  hist = head + ",energy\n";
  for (std::size_t i = 0; i < res.amplitude_history.size(); ++i) {
    hist += csv_row(res.amplitude_history[i].t, res.amplitude_history[i].pairs, &res.energy_history[i].energy);
  }
  write_text(dir / (stem + "_history.csv"), hist);
  files.push_back(stem + "_history.csv");
  write_field_file((dir / (stem + "_final_field.csv")).string(), res.final_field, a.dual);
  files.push_back(stem + "_final_field.csv");

  const auto& d = res.diagnostics;
  std::string observed = res.escape_flag ? "escaped"
                         : d.steps == 0  ? "not_run"
                         : (d.final_sup < 1e-3 * d.initial_sup) ? "decayed"
                                                                : "settled";
  bool above = a.params.lambda > a.cs.lambda0;
  std::string predicted = above ? transition_name(a.verdict.transition_type) : "decay";
  bool consistent = (predicted == "decay" && observed == "decayed") ||
                    (predicted == "TypeI" && observed == "settled") ||
                    (predicted == "TypeII" && observed == "escaped");
  std::string note = "observed: " + observed + ", predicted: " + predicted +
                     ", consistent: " + (consistent ? "true" : "false") + "\n";
  write_text(dir / (stem + "_consistency.txt"), note);
  files.push_back(stem + "_consistency.txt");

  json out = envelope("simulate");
  out["analysis"] = a.report;
  const char* init_name = sim.init == InitKind::RandomSmall ? "random"
                          : sim.init == InitKind::FromEquilibrium ? "equilibrium"
                                                                  : "file";
  json final_amp = res.amplitude_history.empty() ? json::array() : nums(res.amplitude_history.back().pairs);
  out["simulation"] = {{"N", sim.N},
                       {"dt", num(sim.dt)},
                       {"t_end", num(sim.t_end)},
                       {"scheme", sim.scheme == Scheme::IMEX2 ? "imex2" : "imex1"},
                       {"seed", sim.seed},
                       {"init", init_name},
                       {"grid", d.grid},
                       {"steps", d.steps},
                       {"halvings", d.halvings},
                       {"final_dt", num(d.final_dt)},
                       {"final_time", num(res.final_time)},
                       {"escape_flag", res.escape_flag},
                       {"escape_time", res.escape_flag ? num(res.escape_time) : json(nullptr)},
                       {"initial_sup", num(d.initial_sup)},
                       {"final_sup", num(d.final_sup)},
                       {"max_hermitian_violation", num(d.max_hermitian_violation)},
                       {"max_mean_mode", num(d.max_mean_mode)},
                       {"final_amplitudes", final_amp},
                       {"final_energy", res.energy_history.empty() ? json(nullptr) : num(res.energy_history.back().energy)},
                       {"observed", observed},
                       {"predicted", predicted},
                       {"consistent", consistent}};

  if (c.run_reduced) {
    auto y0 = reduced_state_of(initial_field(sim, a.dual, a.cs, a.params), a);
    json red = {{"dt", num(sim.dt / 10)}, {"blew_up", false}};
    try {
      auto tr = run_reduced(a.rc, y0, sim.dt / 10, sim.t_end, 10 * sim.record_every);
      std::string rows = "t";
      for (std::size_t p = 0; p < tr.final_radial.size(); ++p) rows += ",coordinate" + std::to_string(p + 1);
      rows += "\n";
      for (std::size_t i = 0; i < tr.times.size(); ++i) rows += csv_row(tr.times[i], radial_coordinates(a.rc, tr.states[i]));
      write_text(dir / (stem + "_reduced.csv"), rows);
      files.push_back(stem + "_reduced.csv");
      red["final_coordinates"] = nums(tr.final_radial);
      red["nearest"] = tr.nearest;
      red["nearest_distance"] = num(tr.nearest_distance);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BlowUp) throw;
      red["blew_up"] = true;
      red["final_coordinates"] = json::array();
      red["nearest"] = "";
      red["nearest_distance"] = nullptr;
    }
    out["reduced"] = red;
  }
  if (!c.compare_factors.empty()) {
    auto cmp = compare_full_vs_reduced(a.cs, a.dual, a.params, c.compare_factors, sim);
    json entries = json::array();
    for (const auto& e : cmp.entries) {
      entries.push_back({{"lambda", num(e.lambda)},
                         {"excess", num(e.excess)},
                         {"observed", nums(e.observed)},
                         {"predicted", nums(e.predicted)},
                         {"branch", e.branch},
                         {"relative_error", num(e.relative_error)},
                         {"drift", num(e.drift)}});
    }
    out["comparison"] = {{"entries", entries}, {"exponent", num(cmp.exponent)}};
  }
  out["simulation"]["files"] = files;
  return out;
}

ExportFormat export_format(const std::string& f) {
  return f == "csv" ? ExportFormat::CSV : f == "pgm" ? ExportFormat::PGM : ExportFormat::PNG;
}

json cmd_render(const RunConfig& c, const Analysis& a, const fs::path& dir, const std::string& stem) {
  SpectralField field;
  DualLattice dual = a.dual;
  std::string label;
  Pattern expected = Pattern::Trivial;
  std::vector<double> coords;
  if (c.render_source == "field") {
    if (c.render_field.empty()) throw Error(ErrorCode::ConfigError, "render.source = field needs render.field_file");
    DualLattice fd;
    field = read_field_file(c.render_field, &fd);
    double scale = std::max(dual.k1.norm(), dual.k2.norm());
    if ((fd.k1 - dual.k1).norm() > 1e-12 * scale || (fd.k2 - dual.k2).norm() > 1e-12 * scale) {
      throw Error(ErrorCode::ConfigError, "field file lattice differs from the configured lattice");
    }
    label = "field";
  } else {
    Equilibrium eq;
    if (c.render_source == "coordinates") {
      eq.coordinates = c.render_coordinates;
      label = "coords";
    } else {
      if (c.render_label.empty()) throw Error(ErrorCode::ConfigError, "render.source = equilibrium needs render.equilibrium");
      eq = find_state(a, c.render_label);
      label = c.render_label;
      expected = eq.pattern;
    }
    coords = eq.coordinates;
    field = synthesize_stationary(eq, a.cs, c.render_phases);
  }
  FieldRaster raster = rasterize(field, dual, c.raster);
  PatternAnalysis pa = classify_pattern(raster, field, dual);

  std::string base = stem + "_" + label + "_" + pattern_name(pa.pattern) + "_lambda_" + fmt(a.params.lambda, "%.6g") +
                     "_gamma2_" + fmt(a.params.gamma2, "%.6g") + "_gamma3_" + fmt(a.params.gamma3, "%.6g");
  std::vector<std::string> formats = c.formats;
  formats.erase(std::remove(formats.begin(), formats.end(), "json"), formats.end());
  if (formats.empty()) formats = {"png"};
  json files = json::array();
  for (const auto& f : formats) {
    std::string name = base + "." + f;
    export_raster(raster, (dir / name).string(), export_format(f));
    files.push_back(name);
  }
  json out = envelope("render");
  out["analysis"] = a.report;
  json peaks = json::array();
  for (const auto& p : pa.peaks) peaks.push_back(vec(p));
  out["render"] = {{"source", c.render_source},
                   {"label", label},
                   {"coordinates", nums(coords)},
                   {"phases", nums(c.render_phases)},
                   {"width", raster.width},
                   {"height", raster.height},
                   {"tiles", json::array({raster.tiles1, raster.tiles2})},
                   {"geometry", raster.geometry == RasterGeometry::Physical ? "physical" : "fractional"},
                   {"min", num(raster.min)},
                   {"max", num(raster.max)},
                   {"equilibrium_pattern", c.render_source == "equilibrium" ? json(pattern_name(expected)) : json(nullptr)},
                   {"pattern", pattern_name(pa.pattern)},
                   {"neighbor_angles", nums(pa.neighbor_angles)},
                   {"ridge_ratio", num(pa.ridge_ratio)},
                   {"peak_count", pa.peaks.size()},
                   {"files", files}};
  return out;
}

std::string error_json(const std::string& code, const std::string& message, int exit) {
  json e = envelope("error");
  e["error"] = {{"code", code}, {"message", message}, {"exit_code", exit}};
  return e.dump(2) + "\n";
}

void emit(const json& report, const RunConfig& c, const fs::path* dir, const std::string& stem, std::ostream& out) {
  std::string text = report.dump(2) + "\n";
  out << text;
  if (dir) write_text(*dir / (stem + "_report.json"), text);
  (void)c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lattice-periodic Cahn-Hilliard transition analysis"};
  app.require_subcommand(1);
  std::string config_path, out_dir, format, figure;
  std::optional<long long> seed;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "config file (key = value sections, or JSON)");
    if (needs_config) opt->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed for the initial field");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "pgm", "png", "json"}));
  };
  auto* analyze_cmd = app.add_subcommand("analyze", "threshold, verdict and equilibria as JSON");
  auto* simulate_cmd = app.add_subcommand("simulate", "pseudo-spectral run with histories and a consistency note");
  auto* render_cmd = app.add_subcommand("render", "raster of an equilibrium or a field file");
  auto* reproduce_cmd = app.add_subcommand("reproduce", "one of the built-in figure setups");
  add_common(analyze_cmd, true);
  add_common(simulate_cmd, true);
  add_common(render_cmd, true);
  add_common(reproduce_cmd, false);
  reproduce_cmd->add_option("figure", figure, "fig5.2 fig5.3 fig5.4 fig6.1 fig8.1 fig8.2 fig8.3")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json("ConfigError", e.what(), 2);
    return 2;
  }

  try {
    RunConfig c = reproduce_cmd->parsed() ? figure_config(figure) : load_config(config_path);
    if (!out_dir.empty()) c.out_dir = out_dir;
    if (seed) {
      if (*seed < 0) throw Error(ErrorCode::ConfigError, "--seed must be nonnegative");
      c.sim.seed = static_cast<std::uint64_t>(*seed);
    }
    if (!format.empty()) c.formats = {format};
    Analysis a = analyze(c);
    if (analyze_cmd->parsed()) {
      json r = envelope("analyze");
      r["analysis"] = a.report;
      if (c.out_dir.empty()) {
        emit(r, c, nullptr, "", out);
      } else {
        fs::path dir = prepare_dir(c.out_dir);
        emit(r, c, &dir, c.name.empty() ? "analyze" : c.name, out);
      }
    } else if (simulate_cmd->parsed()) {
      fs::path dir = prepare_dir(c.out_dir);
      std::string stem = c.name.empty() ? "simulate" : c.name;
      emit(cmd_simulate(c, a, dir, stem), c, &dir, stem, out);
    } else {
      fs::path dir = prepare_dir(c.out_dir);
      std::string stem = c.name.empty() ? (reproduce_cmd->parsed() ? figure : "render") : c.name;
      json r = cmd_render(c, a, dir, stem);
      if (reproduce_cmd->parsed()) {
        r["command"] = "reproduce";
        r["figure"] = figure;
      }
      emit(r, c, &dir, stem, out);
    }
  } catch (const Error& e) {
    int code = exit_code(e.code());
    err << error_json(e.name(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    err << error_json("Internal", e.what(), 4);
    return 4;
  }
  return 0;
}

}  // namespace chlat
