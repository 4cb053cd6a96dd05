// Command-line front end: curve construction/validation, cone constants,
// mesh and energy inspection, minimization, h-sweeps, scaling fits, and the
// inequality probes. All structured output is JSON (CSV for the sweep
// table); every artifact embeds the effective config hash, the curve hash,
// and the code version so runs are reproducible and attributable.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dcone/cone.hpp"
#include "dcone/curve.hpp"
#include "dcone/energy.hpp"
#include "dcone/estimates.hpp"
#include "dcone/field.hpp"
#include "dcone/mesh.hpp"
#include "dcone/solve.hpp"
#include "dcone/study.hpp"
#include "dcone/version.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// "2^-6" or a plain decimal.
double parse_h(const std::string& s) {
  if (s.rfind("2^", 0) == 0) {
    const double e = std::stod(s.substr(2));
    return std::pow(2.0, e);
  }
  return std::stod(s);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw dcone::config_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw dcone::config_error("cannot write " + path);
  out << text;
}

struct CurveOptions {
  std::string file;
  std::string family = "latitude-wave";
  double amplitude = 0.2;
  int wavenumber = 3;
  int n_theta = 0;  // 0: follow the mesh angular resolution
};

struct MeshOptions {
  int n_r = 96;
  int n_theta = 192;
  std::string grading = "geometric";
};

struct SolveOptions {
  double gtol = 1e-8;
  int max_iter = 800;
  int memory = 12;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::string continuation = "from_previous_h";
  bool identity_metric = false;
};

struct CommonOptions {
  std::string config_file;
  std::string out_dir;
  unsigned long long seed = 0;
  int threads = 1;
};

dcone::BoundaryCurve make_cli_curve(const CurveOptions& c, int default_n_theta, json* spec_echo) {
  if (!c.file.empty()) {
    const json j = read_json_file(c.file);
    if (spec_echo) *spec_echo = {{"file", c.file}};
    return dcone::curve_from_json(j);
  }
  dcone::CurveSpec spec;
  spec.family = dcone::curve_family_from_string(c.family);
  spec.amplitude = c.amplitude;
  spec.wavenumber = c.wavenumber;
  spec.n_theta = c.n_theta > 0 ? c.n_theta : default_n_theta;
  if (spec_echo)
    *spec_echo = {{"family", c.family},
                  {"amplitude", c.amplitude},
                  {"wavenumber", c.wavenumber},
                  {"n_theta", spec.n_theta}};
  return dcone::make_curve(spec);
}

dcone::MeshSpec make_mesh_spec(const MeshOptions& m) {
  dcone::MeshSpec spec;
  spec.n_r = m.n_r;
  spec.n_theta = m.n_theta;
  spec.grading = dcone::grading_from_string(m.grading);
  return spec;
}

dcone::SolveConfig make_solve_config(const SolveOptions& s) {
  dcone::SolveConfig cfg;
  cfg.gtol = s.gtol;
  cfg.max_iter = s.max_iter;
  cfg.memory = s.memory;
  cfg.wolfe_c1 = s.wolfe_c1;
  cfg.wolfe_c2 = s.wolfe_c2;
  cfg.continuation = dcone::continuation_from_string(s.continuation);
  cfg.use_cone_metric = !s.identity_metric;
  cfg.validate();
  return cfg;
}

json solve_options_echo(const SolveOptions& s) {
  return {{"gtol", s.gtol},           {"max_iter", s.max_iter},
          {"memory", s.memory},       {"wolfe_c1", s.wolfe_c1},
          {"wolfe_c2", s.wolfe_c2},   {"continuation", s.continuation},
          {"identity_metric", s.identity_metric}};
}

// Provenance block embedded in every artifact. The config hash covers the
// fully resolved effective configuration of the run.
json provenance(const json& effective_config, const std::string& curve_hash,
                const CommonOptions& common) {
  json p;
  p["code_version"] = dcone::kVersion;
  p["config_hash"] = dcone::hash_hex(dcone::fnv1a(effective_config.dump()));
  p["curve_hash"] = curve_hash;
  p["seed"] = common.seed;
  p["threads"] = common.threads;
  return p;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string resolve_out_dir(const CommonOptions& common, bool required) {
  std::string dir = common.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("DCONE_OUT_DIR")) dir = env;
  }
  if (dir.empty() && required) throw dcone::config_error("no output directory (use --out-dir or DCONE_OUT_DIR)");
  if (!dir.empty()) fs::create_directories(dir);
  return dir;
}

void add_curve_options(CLI::App* cmd, CurveOptions& c, const json& defaults) {
  const json d = defaults.value("curve", json::object());
  c.file = d.value("file", c.file);
  c.family = d.value("family", c.family);
  c.amplitude = d.value("amplitude", c.amplitude);
  c.wavenumber = d.value("wavenumber", c.wavenumber);
  c.n_theta = d.value("n_theta", c.n_theta);
  cmd->add_option("--curve-file", c.file, "load curve samples from a JSON file");
  cmd->add_option("--family,--curve", c.family, "curve family: equator | latitude-wave");
  cmd->add_option("--amplitude", c.amplitude, "latitude-wave amplitude");
  cmd->add_option("--wavenumber", c.wavenumber, "latitude-wave wavenumber (>= 2)");
  cmd->add_option("--curve-n-theta", c.n_theta, "curve sample count (0: match the mesh)");
}

void add_mesh_options(CLI::App* cmd, MeshOptions& m, const json& defaults) {
  const json d = defaults.value("mesh", json::object());
  m.n_r = d.value("n_r", m.n_r);
  m.n_theta = d.value("n_theta", m.n_theta);
  m.grading = d.value("grading", m.grading);
  cmd->add_option("--n-r", m.n_r, "radial interval budget");
  cmd->add_option("--n-theta", m.n_theta, "angular intervals (even)");
  cmd->add_option("--grading", m.grading, "radial grading: geometric | uniform");
}

void add_solve_options(CLI::App* cmd, SolveOptions& s, const json& defaults) {
  const json d = defaults.value("solve", json::object());
  s.gtol = d.value("gtol", s.gtol);
  s.max_iter = d.value("max_iter", s.max_iter);
  s.memory = d.value("memory", s.memory);
  s.wolfe_c1 = d.value("wolfe_c1", s.wolfe_c1);
  s.wolfe_c2 = d.value("wolfe_c2", s.wolfe_c2);
  s.continuation = d.value("continuation", s.continuation);
  s.identity_metric = d.value("identity_metric", s.identity_metric);
  cmd->add_option("--gtol", s.gtol, "gradient max-norm tolerance");
  cmd->add_option("--max-iter", s.max_iter, "iteration cap");
  cmd->add_option("--memory", s.memory, "quasi-Newton history depth");
  cmd->add_option("--wolfe-c1", s.wolfe_c1, "sufficient-decrease constant");
  cmd->add_option("--wolfe-c2", s.wolfe_c2, "curvature constant");
  cmd->add_option("--continuation", s.continuation, "from_profile | from_previous_h");
  cmd->add_flag("--identity-metric", s.identity_metric, "disable the cone metric (plain L-BFGS)");
}

void add_common_options(CLI::App* cmd, CommonOptions& c, const json& defaults) {
  c.out_dir = defaults.value("out_dir", c.out_dir);
  c.seed = defaults.value("seed", c.seed);
  c.threads = defaults.value("threads", c.threads);
  cmd->add_option("--out-dir", c.out_dir, "artifact directory (default: $DCONE_OUT_DIR)");
  cmd->add_option("--seed", c.seed, "random seed recorded in artifacts");
  cmd->add_option("--threads", c.threads, "thread count (1 = bit-reproducible)");
}

json curve_meta_json(const dcone::BoundaryCurve& c) {
  return {{"family", c.family},
          {"amplitude", c.amplitude},
          {"wavenumber", c.wavenumber},
          {"mean_colatitude", c.mean_colatitude},
          {"closure_residual", c.closure_residual},
          {"planarity_defect", c.planarity_defect}};
}

int run_cli(int argc, char** argv) {
  // Pre-scan for --config so file values become flag defaults (flags override).
  json defaults = json::object();
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") defaults = read_json_file(argv[i + 1]);

  CLI::App app{"variational d-cone energy toolkit"};
  // Long-form help only, so --h stays available as the thickness flag.
  app.set_help_flag("--help", "print help and exit");
  app.fallthrough();  // accept global flags (--config) after a subcommand name
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "JSON config supplying flag defaults")->expected(1);

  // ---- curve ----
  auto* curve_cmd = app.add_subcommand("curve", "boundary curve tools");
  curve_cmd->require_subcommand(1);
  CurveOptions curve_gen_c;
  CommonOptions curve_gen_common;
  std::string curve_gen_out;
  auto* curve_gen = curve_cmd->add_subcommand("gen", "construct a curve and write its samples");
  add_curve_options(curve_gen, curve_gen_c, defaults);
  add_common_options(curve_gen, curve_gen_common, defaults);
  curve_gen->add_option("--out", curve_gen_out, "output JSON path (default: stdout only)");

  CurveOptions curve_val_c;
  CommonOptions curve_val_common;
  auto* curve_val = curve_cmd->add_subcommand("validate", "check curve invariants");
  add_curve_options(curve_val, curve_val_c, defaults);
  add_common_options(curve_val, curve_val_common, defaults);

  // ---- cone ----
  auto* cone_cmd = app.add_subcommand("cone", "exact cone diagnostics");
  cone_cmd->require_subcommand(1);
  CurveOptions cone_c;
  CommonOptions cone_common;
  auto* cone_c1 = cone_cmd->add_subcommand("c1", "bending constant by both quadrature routes");
  add_curve_options(cone_c1, cone_c, defaults);
  add_common_options(cone_c1, cone_common, defaults);

  // ---- mesh ----
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh tools");
  mesh_cmd->require_subcommand(1);
  MeshOptions mesh_m;
  CommonOptions mesh_common;
  std::string mesh_h = "2^-6";
  auto* mesh_info = mesh_cmd->add_subcommand("info", "realized mesh summary");
  add_mesh_options(mesh_info, mesh_m, defaults);
  add_common_options(mesh_info, mesh_common, defaults);
  mesh_info->add_option("--h", mesh_h, "thickness (decimal or 2^-k)");

  // ---- energy ----
  auto* energy_cmd = app.add_subcommand("energy", "energy evaluation");
  energy_cmd->require_subcommand(1);
  std::string energy_eval_field;
  CommonOptions energy_eval_common;
  auto* energy_eval = energy_cmd->add_subcommand("eval", "evaluate a stored field snapshot");
  energy_eval->add_option("--field", energy_eval_field, "field snapshot JSON")->required();
  add_common_options(energy_eval, energy_eval_common, defaults);

  CurveOptions energy_prof_c;
  MeshOptions energy_prof_m;
  CommonOptions energy_prof_common;
  std::string energy_prof_h = "2^-6", energy_prof_out;
  auto* energy_prof = energy_cmd->add_subcommand("profile", "evaluate the matching profile at h");
  add_curve_options(energy_prof, energy_prof_c, defaults);
  add_mesh_options(energy_prof, energy_prof_m, defaults);
  add_common_options(energy_prof, energy_prof_common, defaults);
  energy_prof->add_option("--h", energy_prof_h, "thickness (decimal or 2^-k)");
  energy_prof->add_option("--out", energy_prof_out, "write the profile field snapshot here");

  // ---- solve ----
  CurveOptions solve_c;
  MeshOptions solve_m;
  SolveOptions solve_s;
  CommonOptions solve_common;
  std::string solve_h = "2^-6";
  bool solve_no_history = false;
  auto* solve_cmd = app.add_subcommand("solve", "minimize the energy at one h");
  add_curve_options(solve_cmd, solve_c, defaults);
  add_mesh_options(solve_cmd, solve_m, defaults);
  add_solve_options(solve_cmd, solve_s, defaults);
  add_common_options(solve_cmd, solve_common, defaults);
  solve_cmd->add_option("--h", solve_h, "thickness (decimal or 2^-k)");
  solve_cmd->add_flag("--no-history", solve_no_history, "omit per-iteration histories from stdout");

  // ---- sweep ----
  CurveOptions sweep_c;
  MeshOptions sweep_m;
  SolveOptions sweep_s;
  CommonOptions sweep_common;
  std::string sweep_from = "2^-4", sweep_to = "2^-9";
  double sweep_factor = 2.0;
  auto* sweep_cmd = app.add_subcommand("sweep", "continuation sweep over h");
  add_curve_options(sweep_cmd, sweep_c, defaults);
  add_mesh_options(sweep_cmd, sweep_m, defaults);
  add_solve_options(sweep_cmd, sweep_s, defaults);
  add_common_options(sweep_cmd, sweep_common, defaults);
  sweep_cmd->add_option("--h-from", sweep_from, "largest h");
  sweep_cmd->add_option("--h-to", sweep_to, "smallest h");
  sweep_cmd->add_option("--factor", sweep_factor, "h division factor between steps");

  // ---- fit ----
  std::string fit_sweep_dir, fit_table;
  CommonOptions fit_common;
  double fit_c1_ref = 0.0;
  auto* fit_cmd = app.add_subcommand("fit", "least-squares scaling fit");
  fit_cmd->add_option("--sweep-dir", fit_sweep_dir, "directory holding sweep.json");
  fit_cmd->add_option("--table", fit_table, "CSV with columns h,energy_over_h2[,converged]");
  fit_cmd->add_option("--c1-reference", fit_c1_ref, "reference slope for the gap (table mode)");
  add_common_options(fit_cmd, fit_common, defaults);

  // ---- report ----
  std::string report_sweep_dir;
  CommonOptions report_common;
  auto* report_cmd = app.add_subcommand("report", "plot-ready table + diagnostics for a sweep");
  report_cmd->add_option("--sweep-dir", report_sweep_dir, "directory holding sweep.json")->required();
  add_common_options(report_cmd, report_common, defaults);

  // ---- probe ----
  auto* probe_cmd = app.add_subcommand("probe", "inequality probes");
  probe_cmd->require_subcommand(1);
  CommonOptions probe_common;
  double probe_delta = 1e-3;
  auto* probe_drift = probe_cmd->add_subcommand("drift", "mean-drift ratios for the log family");
  probe_drift->add_option("--delta", probe_delta, "log-family cutoff");
  add_common_options(probe_drift, probe_common, defaults);
  CommonOptions probe_trace_common;
  auto* probe_trace = probe_cmd->add_subcommand("trace", "interpolation ratios for sin(k x1)");
  add_common_options(probe_trace, probe_trace_common, defaults);
  CommonOptions probe_core_common;
  auto* probe_core = probe_cmd->add_subcommand("core-sup", "core flattening ratios");
  add_common_options(probe_core, probe_core_common, defaults);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;  // flag misuse is a config error
  }

  // ---------------------------------------------------------------- curve gen
  if (curve_gen->parsed()) {
    json spec_echo;
    const dcone::BoundaryCurve c = make_cli_curve(curve_gen_c, 256, &spec_echo);
    const json cj = dcone::curve_to_json(c);
    const std::string chash = dcone::curve_hash(c);
    json out;
    out["curve"] = spec_echo;
    out["meta"] = curve_meta_json(c);
    out["provenance"] = provenance({{"command", "curve gen"}, {"curve", spec_echo}}, chash, curve_gen_common);
    if (!curve_gen_out.empty()) {
      write_text_file(curve_gen_out, cj.dump(2) + "\n");
      out["written"] = curve_gen_out;
    }
    emit(out);
    return 0;
  }

  // ----------------------------------------------------------- curve validate
  if (curve_val->parsed()) {
    json spec_echo;
    const dcone::BoundaryCurve c = make_cli_curve(curve_val_c, 256, &spec_echo);
    const dcone::CurveValidation v = dcone::validate_curve(c);
    json out;
    out["curve"] = spec_echo;
    out["meta"] = curve_meta_json(c);
    out["validation"] = {{"unit_length_max", v.unit_length_max},
                         {"unit_speed_max", v.unit_speed_max},
                         {"orthogonality_max", v.orthogonality_max},
                         {"periodicity_max", v.periodicity_max},
                         {"planarity_defect", v.planarity_defect},
                         {"planar", v.planar}};
    out["provenance"] =
        provenance({{"command", "curve validate"}, {"curve", spec_echo}}, dcone::curve_hash(c), curve_val_common);
    emit(out);
    return 0;
  }

  // ------------------------------------------------------------------ cone c1
  if (cone_c1->parsed()) {
    json spec_echo;
    const dcone::BoundaryCurve c = make_cli_curve(cone_c, 256, &spec_echo);
    const dcone::C1Result r = dcone::c1_constant(c);
    json out;
    out["c1"] = r.c1;
    out["c1_quadrature"] = r.c1_quadrature;
    out["relative_gap"] = r.relative_gap;
    out["curve"] = spec_echo;
    out["provenance"] =
        provenance({{"command", "cone c1"}, {"curve", spec_echo}}, dcone::curve_hash(c), cone_common);
    emit(out);
    return 0;
  }

  // ---------------------------------------------------------------- mesh info
  if (mesh_info->parsed()) {
    const double h = parse_h(mesh_h);
    const dcone::MeshSpec spec = make_mesh_spec(mesh_m);
    const auto mesh = dcone::build_mesh(spec, h);
    json out;
    out["h"] = h;
    out["grading"] = dcone::to_string(mesh->grading);
    out["rings"] = mesh->rings();
    out["n_theta"] = mesh->n_theta;
    out["nodes"] = mesh->node_count();
    out["r_min"] = mesh->r[1];
    out["rings_per_octave"] = mesh->rings_per_octave;
    out["weight_total"] = mesh->ring_weight.sum();  // integrates r dr: 1/2
    const json cfg = {{"command", "mesh info"}, {"h", h}, {"n_r", mesh_m.n_r},
                      {"n_theta", mesh_m.n_theta}, {"grading", mesh_m.grading}};
    out["provenance"] = provenance(cfg, "", mesh_common);
    emit(out);
    return 0;
  }

  // -------------------------------------------------------------- energy eval
  if (energy_eval->parsed()) {
    const json fj = read_json_file(energy_eval_field);
    const dcone::Field y = dcone::field_from_json(fj);
    const double h = y.mesh->h;
    dcone::EnergyModel model(y.mesh);
    const dcone::EnergyBreakdown b = model.evaluate(y, h);
    json out;
    out["breakdown"] = dcone::breakdown_to_json(b);
    const json cfg = {{"command", "energy eval"}, {"field", energy_eval_field}};
    out["provenance"] = provenance(cfg, fj.value("curve_hash", ""), energy_eval_common);
    emit(out);
    return 0;
  }

  // ----------------------------------------------------------- energy profile
  if (energy_prof->parsed()) {
    const double h = parse_h(energy_prof_h);
    const dcone::MeshSpec spec = make_mesh_spec(energy_prof_m);
    const auto mesh = dcone::build_mesh(spec, h);
    json spec_echo;
    const dcone::BoundaryCurve c = make_cli_curve(energy_prof_c, spec.n_theta, &spec_echo);
    const dcone::Field y = dcone::make_profile_field(mesh, c, h);
    dcone::EnergyModel model(mesh);
    const dcone::EnergyBreakdown b = model.evaluate(y, h);
    const std::string chash = dcone::curve_hash(c);
    json out;
    out["breakdown"] = dcone::breakdown_to_json(b);
    out["c1"] = dcone::c1_angular(c);
    const json cfg = {{"command", "energy profile"}, {"h", h}, {"curve", spec_echo},
                      {"n_r", energy_prof_m.n_r}, {"n_theta", energy_prof_m.n_theta},
                      {"grading", energy_prof_m.grading}};
    out["provenance"] = provenance(cfg, chash, energy_prof_common);
    if (!energy_prof_out.empty()) {
      json fj = dcone::field_to_json(y, chash);
      fj["provenance"] = out["provenance"];
      write_text_file(energy_prof_out, fj.dump() + "\n");
      out["written"] = energy_prof_out;
    }
    emit(out);
    return 0;
  }

  // -------------------------------------------------------------------- solve
  if (solve_cmd->parsed()) {
    const double h = parse_h(solve_h);
    const dcone::MeshSpec spec = make_mesh_spec(solve_m);
    const auto mesh = dcone::build_mesh(spec, h);
    json spec_echo;
    const dcone::BoundaryCurve c = make_cli_curve(solve_c, spec.n_theta, &spec_echo);
    const dcone::SolveConfig cfg = make_solve_config(solve_s);
    dcone::EnergyModel model(mesh);
    const dcone::Field y0 = dcone::make_profile_field(mesh, c, h);
    const dcone::SolveResult r = dcone::minimize_energy(model, c, y0, h, cfg);
    const std::string chash = dcone::curve_hash(c);
    const json effective = {{"command", "solve"}, {"h", h}, {"curve", spec_echo},
                            {"mesh", {{"n_r", solve_m.n_r}, {"n_theta", solve_m.n_theta}, {"grading", solve_m.grading}}},
                            {"solve", solve_options_echo(solve_s)}};
    json out = dcone::result_to_json(r, !solve_no_history);
    out["provenance"] = provenance(effective, chash, solve_common);
    const std::string dir = resolve_out_dir(solve_common, false);
    if (!dir.empty()) {
      json fj = dcone::field_to_json(r.y, chash);
      fj["provenance"] = out["provenance"];
      write_text_file(dir + "/field.json", fj.dump() + "\n");
      write_text_file(dir + "/result.json", out.dump(2) + "\n");
      out["written"] = dir;
    }
    emit(out);
    return r.converged ? 0 : 4;
  }

  // -------------------------------------------------------------------- sweep
  if (sweep_cmd->parsed()) {
    const double h_from = parse_h(sweep_from), h_to = parse_h(sweep_to);
    if (!(sweep_factor > 1.0)) throw dcone::config_error("sweep: factor must be > 1");
    if (!(h_to <= h_from)) throw dcone::config_error("sweep: need h-to <= h-from");
    std::vector<double> hs;
    for (double h = h_from; h >= h_to * (1.0 - 1e-12); h /= sweep_factor) hs.push_back(h);
    const dcone::MeshSpec spec = make_mesh_spec(sweep_m);
    json spec_echo;
    const dcone::BoundaryCurve c = make_cli_curve(sweep_c, spec.n_theta, &spec_echo);
    const dcone::SolveConfig cfg = make_solve_config(sweep_s);
    const std::vector<dcone::SolveResult> results = dcone::continuation_sweep(c, spec, hs, cfg);
    const std::string chash = dcone::curve_hash(c);
    const json effective = {{"command", "sweep"}, {"h", hs}, {"curve", spec_echo},
                            {"mesh", {{"n_r", sweep_m.n_r}, {"n_theta", sweep_m.n_theta}, {"grading", sweep_m.grading}}},
                            {"solve", solve_options_echo(sweep_s)}};
    const json prov = provenance(effective, chash, sweep_common);

    const std::string dir = resolve_out_dir(sweep_common, true);
    json sj;
    sj["provenance"] = prov;
    sj["curve"] = spec_echo;
    sj["curve_data"] = dcone::curve_to_json(c);
    sj["mesh"] = {{"n_r", sweep_m.n_r}, {"n_theta", sweep_m.n_theta}, {"grading", sweep_m.grading}};
    sj["results"] = json::array();
    int n_converged = 0;
    for (size_t i = 0; i < results.size(); ++i) {
      json rj = dcone::result_to_json(results[i]);
      std::ostringstream name;
      name << "field_" << i << ".json";
      json fj = dcone::field_to_json(results[i].y, chash);
      fj["provenance"] = prov;
      write_text_file(dir + "/" + name.str(), fj.dump() + "\n");
      rj["field"] = name.str();
      sj["results"].push_back(rj);
      if (results[i].converged) ++n_converged;
    }
    write_text_file(dir + "/sweep.json", sj.dump(2) + "\n");
    write_text_file(dir + "/sweep.csv", dcone::sweep_table_csv(results, c));

    json out;
    out["provenance"] = prov;
    out["written"] = dir;
    out["n_converged"] = n_converged;
    if (n_converged >= 4) {
      const dcone::ScalingFit fit = dcone::fit_log_scaling(results, dcone::c1_angular(c));
      json fj = dcone::fit_to_json(fit);
      fj["provenance"] = prov;
      write_text_file(dir + "/fit.json", fj.dump(2) + "\n");
      out["fit"] = dcone::fit_to_json(fit);
    }
    emit(out);
    return n_converged >= 4 ? 0 : 4;
  }

  // ---------------------------------------------------------------------- fit
  if (fit_cmd->parsed()) {
    std::vector<dcone::FitPoint> pts;
    double c1_ref = fit_c1_ref;
    json source;
    if (!fit_sweep_dir.empty()) {
      const json sj = read_json_file(fit_sweep_dir + "/sweep.json");
      const dcone::BoundaryCurve c = dcone::curve_from_json(sj.at("curve_data"));
      c1_ref = dcone::c1_angular(c);
      for (const auto& rj : sj.at("results")) {
        const double h = rj.at("h").get<double>();
        pts.push_back({h, rj.at("breakdown").at("total").get<double>() / (h * h),
                       rj.at("converged").get<bool>()});
      }
      source = {{"sweep_dir", fit_sweep_dir}};
    } else if (!fit_table.empty()) {
      std::ifstream in(fit_table);
      if (!in) throw dcone::config_error("cannot open " + fit_table);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || !(std::isdigit(line[0]) || line[0] == '.' || line[0] == '-')) continue;
        std::istringstream ls(line);
        std::string tok;
        dcone::FitPoint p;
        if (!std::getline(ls, tok, ',')) continue;
        p.h = std::stod(tok);
        if (!std::getline(ls, tok, ',')) continue;
        p.energy_over_h2 = std::stod(tok);
        if (std::getline(ls, tok, ',')) p.converged = std::stoi(tok) != 0;
        pts.push_back(p);
      }
      source = {{"table", fit_table}};
    } else {
      throw dcone::config_error("fit: need --sweep-dir or --table");
    }
    const dcone::ScalingFit fit = dcone::fit_log_scaling_points(pts, c1_ref);
    json out = dcone::fit_to_json(fit);
    out["provenance"] = provenance({{"command", "fit"}, {"source", source}}, "", fit_common);
    emit(out);
    return 0;
  }

  // ------------------------------------------------------------------- report
  if (report_cmd->parsed()) {
    const json sj = read_json_file(report_sweep_dir + "/sweep.json");
    const dcone::BoundaryCurve c = dcone::curve_from_json(sj.at("curve_data"));
    std::vector<dcone::SolveResult> results;
    for (const auto& rj : sj.at("results")) {
      dcone::SolveResult r;
      r.h = rj.at("h").get<double>();
      r.y = dcone::field_from_json(read_json_file(report_sweep_dir + "/" + rj.at("field").get<std::string>()));
      dcone::EnergyModel model(r.y.mesh);
      r.breakdown = model.evaluate(r.y, r.h);
      r.iterations = rj.at("iterations").get<int>();
      r.termination = rj.at("termination").get<std::string>();
      r.converged = rj.at("converged").get<bool>();
      results.push_back(std::move(r));
    }
    const std::string csv = dcone::sweep_table_csv(results, c);
    write_text_file(report_sweep_dir + "/report.csv", csv);
    json out;
    out["written"] = report_sweep_dir + "/report.csv";
    out["diagnostics"] = json::array();
    for (const auto& r : results)
      out["diagnostics"].push_back(dcone::diagnostics_to_json(dcone::lemma_diagnostics(r, c)));
    if (std::count_if(results.begin(), results.end(), [](const auto& r) { return r.converged; }) >= 4)
      out["fit"] = dcone::fit_to_json(dcone::fit_log_scaling(results, dcone::c1_angular(c)));
    out["provenance"] = provenance({{"command", "report"}, {"sweep_dir", report_sweep_dir}},
                                   sj.at("provenance").value("curve_hash", ""), report_common);
    emit(out);
    return 0;
  }

  // -------------------------------------------------------------------- probe
  if (probe_drift->parsed() || probe_trace->parsed() || probe_core->parsed()) {
    dcone::MeshSpec spec;
    spec.n_r = 128;
    spec.n_theta = 128;
    const auto mesh = dcone::build_mesh(spec, 0.004);
    json out;
    CommonOptions common;
    if (probe_drift->parsed()) {
      common = probe_common;
      std::vector<double> eps;
      for (int k = 2; k <= 8; ++k) eps.push_back(std::pow(2.0, -k));
      out["rows"] = json::array();
      for (const auto& r : dcone::probe_mean_drift(mesh, eps, probe_delta))
        out["rows"].push_back({{"function", r.function}, {"eps", r.eps}, {"drift", r.drift},
                               {"grad_l2", r.grad_l2}, {"ratio", r.ratio}});
      out["provenance"] = provenance({{"command", "probe drift"}, {"delta", probe_delta}}, "", common);
    } else if (probe_trace->parsed()) {
      common = probe_trace_common;
      out["rows"] = json::array();
      for (const auto& r : dcone::probe_trace_ratios(mesh, {1, 2, 4, 8, 16}))
        out["rows"].push_back({{"k", r.k}, {"trace_ratio", r.trace_ratio}, {"grad_ratio", r.grad_ratio}});
      out["provenance"] = provenance({{"command", "probe trace"}}, "", common);
    } else {
      common = probe_core_common;
      std::vector<double> hl;
      for (int k = 3; k <= 6; ++k) hl.push_back(std::pow(2.0, -k));
      out["rows"] = json::array();
      for (const auto& r : dcone::probe_core_sup(mesh, hl))
        out["rows"].push_back({{"function", r.function}, {"h", r.h}, {"sup", r.sup},
                               {"hess_l2", r.hess_l2}, {"ratio", r.ratio}});
      out["provenance"] = provenance({{"command", "probe core-sup"}}, "", common);
    }
    emit(out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const dcone::config_error& e) {
    json err;
    err["error"] = {{"type", "config"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 2;
  } catch (const dcone::numerical_error& e) {
    json err;
    err["error"] = {{"type", "numerical"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 3;
  } catch (const std::exception& e) {
    json err;
    err["error"] = {{"type", "internal"}, {"message", e.what()}};
    std::cout << err.dump(2) << "\n";
    return 3;
  }
}
