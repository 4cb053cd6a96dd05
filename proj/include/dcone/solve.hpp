#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dcone/curve.hpp"
#include "dcone/energy.hpp"
#include "dcone/field.hpp"
#include "dcone/lbfgs.hpp"
#include "dcone/mesh.hpp"
#include "dcone/precond.hpp"

namespace dcone {

enum class Continuation { from_profile, from_previous_h };

inline std::string to_string(Continuation c) {
  return c == Continuation::from_profile ? "from_profile" : "from_previous_h";
}
inline Continuation continuation_from_string(const std::string& s) {
  if (s == "from_profile") return Continuation::from_profile;
  if (s == "from_previous_h") return Continuation::from_previous_h;
  throw config_error("unknown continuation mode: " + s);
}

struct SolveConfig {
  double gtol = 1e-8;  // max-norm of the gradient over free nodes
  int max_iter = 800;
  int memory = 12;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int ls_max_evals = 60;
  double f_target = -std::numeric_limits<double>::infinity();
  Continuation continuation = Continuation::from_profile;
  bool use_cone_metric = true;  // identity initial metric when false

  void validate() const {
    if (!(gtol > 0.0)) throw config_error("solve: gtol must be positive");
    if (max_iter < 1) throw config_error("solve: max_iter must be >= 1");
    if (memory < 1) throw config_error("solve: memory must be >= 1");
    if (!(0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0))
      throw config_error("solve: need 0 < c1 < c2 < 1");
  }
};

struct SolveResult {
  Field y;
  EnergyBreakdown breakdown;
  double h = 0.0;
  int iterations = 0;
  long evaluations = 0;
  std::string termination;
  bool converged = false;  // reached the gradient tolerance (or the target value)
  std::vector<double> energy_history;
  std::vector<double> grad_norm_history;
};

// Minimize E_h over fields with the given boundary curve and a pinned
// center. The Dirichlet rows of the start iterate are overwritten with the
// exact constraint data and are never touched afterwards, so they hold
// bit-for-bit in the result.
inline SolveResult minimize_energy(const EnergyModel& model, const BoundaryCurve& curve, Field y0,
                                   double h, const SolveConfig& cfg) {
  cfg.validate();
  require_curve_matches_mesh(curve, model.mesh());
  const int n = y0.rows() - 1;
  for (int c = 0; c < 3; ++c) {
    y0.comp[static_cast<size_t>(c)].row(n) = curve.gamma.col(c).transpose();
    y0.comp[static_cast<size_t>(c)].row(0).setZero();
  }

  Field work = y0;
  Field gfield(model.mesh_ptr());
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) -> double {
    unpack_free_nodes(x, work);
    const double f = model.energy_and_gradient(work, h, gfield);
    g = pack_free_nodes(gfield);
    return f;
  };

  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> metric;
  if (cfg.use_cone_metric) {
    auto pre = std::make_shared<ConePreconditioner>(model.mesh(), h);
    metric = [pre](const Eigen::VectorXd& v) { return pre->apply(v); };
  } else {
    metric = [](const Eigen::VectorXd& v) { return v; };
  }

  LbfgsOptions opt;
  opt.memory = cfg.memory;
  opt.gtol = cfg.gtol;
  opt.max_iter = cfg.max_iter;
  opt.f_target = cfg.f_target;
  opt.wolfe_c1 = cfg.wolfe_c1;
  opt.wolfe_c2 = cfg.wolfe_c2;
  opt.ls_max_evals = cfg.ls_max_evals;

  Eigen::VectorXd x = pack_free_nodes(y0);
  MinimizeReport rep = lbfgs_minimize(objective, metric, x, opt);

  SolveResult out;
  out.y = std::move(y0);
  unpack_free_nodes(x, out.y);
  out.breakdown = model.evaluate(out.y, h);
  out.h = h;
  out.iterations = rep.iterations;
  out.evaluations = rep.evaluations;
  out.termination = to_string(rep.status);
  out.converged = rep.status == SolveStatus::gradient_converged ||
                  rep.status == SolveStatus::stopped_on_target;
  out.energy_history = std::move(rep.energy_history);
  out.grad_norm_history = std::move(rep.grad_norm_history);
  return out;
}

// Solve a list of thicknesses in order, warm-starting each solve either
// from the matching profile at its own h or from the previous minimizer
// transferred to the new mesh (list the h values largest first for that
// mode to make sense).
inline std::vector<SolveResult> continuation_sweep(const BoundaryCurve& curve, const MeshSpec& spec,
                                                   const std::vector<double>& h_values,
                                                   const SolveConfig& cfg) {
  if (h_values.empty()) throw config_error("continuation_sweep: empty h list");
  for (size_t i = 1; i < h_values.size(); ++i)
    if (!(h_values[i] < h_values[i - 1]))
      throw config_error("continuation_sweep: h values must be strictly decreasing");
  std::vector<SolveResult> out;
  out.reserve(h_values.size());
  for (size_t i = 0; i < h_values.size(); ++i) {
    const double h = h_values[i];
    auto mesh = build_mesh(spec, h);
    EnergyModel model(mesh);
    Field y0 = (cfg.continuation == Continuation::from_previous_h && i > 0)
                   ? resample_field(out.back().y, mesh)
                   : make_profile_field(mesh, curve, h);
    out.push_back(minimize_energy(model, curve, std::move(y0), h, cfg));
  }
  return out;
}

inline nlohmann::json breakdown_to_json(const EnergyBreakdown& b) {
  nlohmann::json j;
  j["h"] = b.h;
  j["membrane"] = b.membrane;
  j["bending"] = b.bending;
  j["total"] = b.total;
  j["cutoff"] = b.cutoff;
  j["core"] = {{"membrane", b.core.membrane}, {"bending", b.core.bending}};
  j["per_annulus"] = nlohmann::json::array();
  for (const auto& a : b.per_annulus)
    j["per_annulus"].push_back({{"membrane", a.membrane}, {"bending", a.bending}});
  return j;
}

inline nlohmann::json result_to_json(const SolveResult& r, bool with_history = true) {
  nlohmann::json j;
  j["h"] = r.h;
  j["breakdown"] = breakdown_to_json(r.breakdown);
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["termination"] = r.termination;
  j["converged"] = r.converged;
  j["final_gradient_norm"] = r.grad_norm_history.empty() ? 0.0 : r.grad_norm_history.back();
  if (with_history) {
    j["energy_history"] = r.energy_history;
    j["grad_norm_history"] = r.grad_norm_history;
  }
  return j;
}

}  // namespace dcone
