#pragma once

#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dcone/common.hpp"
#include "dcone/cone.hpp"
#include "dcone/curve.hpp"
#include "dcone/energy.hpp"
#include "dcone/estimates.hpp"
#include "dcone/field.hpp"
#include "dcone/solve.hpp"

namespace dcone {

// Least-squares fit of E/h² = a·ln(1/h) + b over the converged sweep
// members, reported against the curve's exact cone constant.
struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  double h_min = 0.0, h_max = 0.0;
  int n_used = 0;
  double c1_reference = 0.0;
  double relative_slope_gap = 0.0;
};

struct FitPoint {
  double h = 0.0;
  double energy_over_h2 = 0.0;
  bool converged = true;
};

inline ScalingFit fit_log_scaling_points(const std::vector<FitPoint>& pts, double c1_reference) {
  std::vector<double> x, y;
  double hmin = 1.0, hmax = 0.0;
  for (const auto& p : pts) {
    if (!p.converged) continue;
    x.push_back(std::log(1.0 / p.h));
    y.push_back(p.energy_over_h2);
    hmin = std::min(hmin, p.h);
    hmax = std::max(hmax, p.h);
  }
  const int n = static_cast<int>(x.size());
  if (n < 4) throw config_error("fit_log_scaling: need at least 4 converged h values");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += x[static_cast<size_t>(i)];
    sy += y[static_cast<size_t>(i)];
    sxx += x[static_cast<size_t>(i)] * x[static_cast<size_t>(i)];
    sxy += x[static_cast<size_t>(i)] * y[static_cast<size_t>(i)];
  }
  ScalingFit f;
  const double det = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  double rss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = y[static_cast<size_t>(i)] - (f.slope * x[static_cast<size_t>(i)] + f.intercept);
    rss += r * r;
  }
  f.residual_rms = std::sqrt(rss / n);
  f.h_min = hmin;
  f.h_max = hmax;
  f.n_used = n;
  f.c1_reference = c1_reference;
  f.relative_slope_gap = c1_reference != 0.0 ? std::abs(f.slope - c1_reference) / c1_reference
                                             : std::abs(f.slope);
  return f;
}

inline ScalingFit fit_log_scaling(const std::vector<SolveResult>& results, double c1_reference) {
  std::vector<FitPoint> pts;
  pts.reserve(results.size());
  for (const auto& r : results)
    pts.push_back({r.h, r.breakdown.total / (r.h * r.h), r.converged});
  return fit_log_scaling_points(pts, c1_reference);
}

inline nlohmann::json fit_to_json(const ScalingFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"residual_rms", f.residual_rms},
          {"h_min", f.h_min},
          {"h_max", f.h_max},
          {"n_used", f.n_used},
          {"c1_reference", f.c1_reference},
          {"relative_slope_gap", f.relative_slope_gap}};
}

// e = y − rγ on the shared mesh. Boundary rows cancel exactly (both equal
// the curve samples bit-for-bit) and the center is zero on both sides.
inline Field deviation_field(const Field& y, const BoundaryCurve& curve) {
  Field cone = make_cone_field(y.mesh, curve);
  Field e(y.mesh);
  for (int c = 0; c < 3; ++c)
    e.comp[static_cast<size_t>(c)] = y.comp[static_cast<size_t>(c)] - cone.comp[static_cast<size_t>(c)];
  return e;
}

struct AnnulusDeviation {
  int j = 0;          // annulus (2^{-j-1}, 2^{-j}]
  double r0 = 0.0;    // outer radius 2^{-j}
  double e_l2_sq = 0.0;
  double bound_primary = 0.0;  // r₀³ h ln(1/h)
  double bound_full = 0.0;     // r₀³ h ln(1/h) + r₀² h² ln²(1/h)
  double ratio_primary = 0.0;
  double ratio_full = 0.0;
};

struct LemmaDiagnostics {
  double h = 0.0;
  double sup_core = 0.0;   // sup over B_h nodes of |y|
  double sup_ratio = 0.0;  // (sup_core − h) / (h √ln(1/h) · ‖∇²y‖_{L²(B₁)})
  std::vector<AnnulusDeviation> annuli;  // all j with 2^{-j} ≥ h·ln(1/h)
  double excess = 0.0;     // E/h² − C₁ ln(1/h) + C₁ ln(ln(1/h))
  double membrane = 0.0;   // report-only growth diagnostic
};

inline LemmaDiagnostics lemma_diagnostics(const SolveResult& res, const BoundaryCurve& curve) {
  const Field& y = res.y;
  const PolarMesh& m = *y.mesh;
  const double h = res.h;
  LemmaDiagnostics d;
  d.h = h;
  d.membrane = res.breakdown.membrane;

  double sup = 0.0;
  int n_core = 0;
  for (int i = 1; i <= m.rings(); ++i) {
    if (m.r[static_cast<size_t>(i)] > h + 1e-15) break;
    ++n_core;
    for (int j = 0; j < m.n_theta; ++j) {
      double s = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double v = y.comp[static_cast<size_t>(c)](i, j);
        s += v * v;
      }
      sup = std::max(sup, std::sqrt(s));
    }
  }
  if (n_core == 0) throw config_error("lemma_diagnostics: no mesh nodes inside B_h");
  d.sup_core = sup;
  const double hess = norms(y, Region::disk()).hess_l2;
  const double denom = h * std::sqrt(std::log(1.0 / h)) * hess;
  d.sup_ratio = denom > 1e-14 ? (sup - h) / denom : 0.0;

  const Field e = deviation_field(y, curve);
  const double lh = std::log(1.0 / h);
  for (int j = 0;; ++j) {
    const double r0 = std::pow(2.0, -j);
    if (r0 < h * lh - 1e-15) break;
    if (0.5 * r0 < 2.0 * m.r[1]) break;
    AnnulusDeviation a;
    a.j = j;
    a.r0 = r0;
    const Norms n = norms(e, Region::annulus(0.5 * r0, r0));
    a.e_l2_sq = n.l2 * n.l2;
    a.bound_primary = r0 * r0 * r0 * h * lh;
    a.bound_full = a.bound_primary + r0 * r0 * h * h * lh * lh;
    a.ratio_primary = a.e_l2_sq / a.bound_primary;
    a.ratio_full = a.e_l2_sq / a.bound_full;
    d.annuli.push_back(a);
  }

  const double c1 = c1_angular(curve);
  d.excess = res.breakdown.total / (h * h) - c1 * lh + c1 * std::log(lh);
  return d;
}

inline nlohmann::json diagnostics_to_json(const LemmaDiagnostics& d) {
  nlohmann::json j;
  j["h"] = d.h;
  j["sup_core"] = d.sup_core;
  j["sup_ratio"] = d.sup_ratio;
  j["excess"] = d.excess;
  j["membrane"] = d.membrane;
  j["annuli"] = nlohmann::json::array();
  for (const auto& a : d.annuli)
    j["annuli"].push_back({{"j", a.j},
                           {"r0", a.r0},
                           {"e_l2_sq", a.e_l2_sq},
                           {"bound_primary", a.bound_primary},
                           {"bound_full", a.bound_full},
                           {"ratio_primary", a.ratio_primary},
                           {"ratio_full", a.ratio_full}});
  return j;
}

// --- probes -----------------------------------------------------------------

struct DriftRow {
  std::string function;
  double eps = 0.0;
  double drift = 0.0;     // |avg_{B_ε} w − avg_{B₁} w|
  double grad_l2 = 0.0;   // ‖∇w‖_{L²(B₁)}
  double ratio = 0.0;     // drift / (√ln(1/ε) · grad_l2)
};

// Mean-drift ratios for the saturating logarithmic family
// w = ln(1/max(r,δ)) and two smooth controls. The log family's ratio must
// stay bounded as ε shrinks; the controls pin the trivial cases.
inline std::vector<DriftRow> probe_mean_drift(std::shared_ptr<const PolarMesh> mesh,
                                              const std::vector<double>& eps_list, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw config_error("probe_mean_drift: delta out of (0,1)");
  std::vector<DriftRow> out;
  struct Case { std::string name; std::function<double(double, double)> f; };
  const std::vector<Case> cases = {
      {"constant", [](double, double) { return 1.0; }},
      {"x1", [](double x, double) { return x; }},
      {"log_family", [delta](double x, double y) {
         const double r = std::max(std::sqrt(x * x + y * y), delta);
         return std::log(1.0 / r);
       }},
  };
  for (const auto& cs : cases) {
    const ScalarField w = scalar_from_function(mesh, cs.f);
    const double mean_full = region_mean(w, 1.0);
    const double grad = norms(w, Region::disk()).grad_l2;
    for (double eps : eps_list) {
      if (!(eps > 0.0 && eps < 1.0)) throw config_error("probe_mean_drift: eps out of (0,1)");
      DriftRow row;
      row.function = cs.name;
      row.eps = eps;
      row.drift = std::abs(region_mean(w, eps) - mean_full);
      row.grad_l2 = grad;
      const double denom = std::sqrt(std::log(1.0 / eps)) * grad;
      row.ratio = denom > 1e-14 ? row.drift / denom : 0.0;
      out.push_back(row);
    }
  }
  return out;
}

struct CoreSupRow {
  std::string function;
  double h = 0.0;
  double sup = 0.0;      // sup_{B_h} |v − v(0) − (avg_{B_h}∇v)·x|
  double hess_l2 = 0.0;  // ‖∇²v‖_{L²(B_h)}
  double ratio = 0.0;    // sup / (h · hess_l2)
};

// Core flattening ratios: quadratics give an h-independent ratio, affine
// functions vanish identically, oscillatory fields stay bounded.
inline std::vector<CoreSupRow> probe_core_sup(std::shared_ptr<const PolarMesh> mesh,
                                              const std::vector<double>& h_list) {
  std::vector<CoreSupRow> out;
  struct Case { std::string name; std::function<double(double, double)> f; };
  const std::vector<Case> cases = {
      {"quadratic", [](double x, double y) { return x * x + y * y; }},
      {"linear", [](double x, double y) { return 0.7 * x - 0.3 * y + 0.1; }},
      {"oscillatory", [](double x, double y) { return std::sin(10.0 * x) * std::sin(10.0 * y); }},
  };
  const PolarMesh& m = *mesh;
  for (const auto& cs : cases) {
    const ScalarField v = scalar_from_function(mesh, cs.f);
    for (double h : h_list) {
      if (h < 2.0 * m.r[1]) throw config_error("probe_core_sup: h below mesh resolution");
      CoreSupRow row;
      row.function = cs.name;
      row.h = h;
      const double v0 = v.comp[0](0, 0);
      const Eigen::Vector2d g = region_mean_gradient(v, h);
      double sup = 0.0;
      for (int i = 1; i <= m.rings(); ++i) {
        const double r = m.r[static_cast<size_t>(i)];
        if (r > h + 1e-15) break;
        for (int j = 0; j < m.n_theta; ++j) {
          const double x = r * std::cos(m.theta[static_cast<size_t>(j)]);
          const double y = r * std::sin(m.theta[static_cast<size_t>(j)]);
          sup = std::max(sup, std::abs(v.comp[0](i, j) - v0 - g[0] * x - g[1] * y));
        }
      }
      row.sup = sup;
      row.hess_l2 = norms(v, Region::disk(h)).hess_l2;
      const double denom = h * row.hess_l2;
      row.ratio = denom > 1e-14 ? sup / denom : 0.0;
      out.push_back(row);
    }
  }
  return out;
}

struct TraceRow {
  int k = 0;
  double trace_ratio = 0.0;
  double grad_ratio = 0.0;
};

// Interpolation-inequality ratios for the oscillatory family sin(k x₁).
inline std::vector<TraceRow> probe_trace_ratios(std::shared_ptr<const PolarMesh> mesh,
                                                const std::vector<int>& k_list) {
  std::vector<TraceRow> out;
  for (int k : k_list) {
    const ScalarField f =
        scalar_from_function(mesh, [k](double x, double) { return std::sin(k * x); });
    const InterpolationRatios r = interpolation_ratio(f, Region::disk());
    out.push_back({k, r.trace_ratio, r.grad_ratio});
  }
  return out;
}

// --- tables -----------------------------------------------------------------

inline std::string csv_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Plot-ready sweep table; one row per h, columns fixed so downstream
// plotting never has to parse headers conditionally.
inline std::string sweep_table_csv(const std::vector<SolveResult>& results,
                                   const BoundaryCurve& curve) {
  std::ostringstream os;
  os << "h,ln_inv_h,energy,energy_over_h2,membrane,bending,iterations,converged,"
        "sup_core,excess,annulus_ratio_j0,annulus_ratio_j1,annulus_ratio_j2\n";
  for (const auto& r : results) {
    const LemmaDiagnostics d = lemma_diagnostics(r, curve);
    double ratios[3] = {0.0, 0.0, 0.0};
    for (const auto& a : d.annuli)
      if (a.j >= 0 && a.j < 3) ratios[a.j] = a.ratio_primary;
    os << csv_double(r.h) << ',' << csv_double(std::log(1.0 / r.h)) << ','
       << csv_double(r.breakdown.total) << ',' << csv_double(r.breakdown.total / (r.h * r.h)) << ','
       << csv_double(r.breakdown.membrane) << ',' << csv_double(r.breakdown.bending) << ','
       << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << csv_double(d.sup_core) << ','
       << csv_double(d.excess) << ',' << csv_double(ratios[0]) << ',' << csv_double(ratios[1])
       << ',' << csv_double(ratios[2]) << '\n';
  }
  return os.str();
}

}  // namespace dcone
