#pragma once

#include <fstream>

#include <json.hpp>

#include "gllab/curvature.hpp"
#include "gllab/glcurve.hpp"

namespace gllab {

using Json = nlohmann::ordered_json;

inline Json to_json(const CurvatureReport& rep) {
  Json samples = Json::array();
  for (size_t i = 0; i < rep.values.size(); ++i) {
    Json params = Json::object();
    for (size_t j = 0; j < rep.param_names.size() && j < rep.sample_points[i].size(); ++j)
      params[rep.param_names[j]] = rep.sample_points[i][j];
    samples.push_back({{"params", params}, {"value", rep.values[i]}});
  }
  return Json{{"name", rep.name},
              {"samples", samples},
              {"bound", rep.bound},
              {"min_value", rep.min_value},
              {"margin", rep.margin},
              {"pass", rep.pass}};
}

inline CurvatureReport report_from_json(const Json& j) {
  CurvatureReport rep;
  rep.name = j.value("name", "");
  rep.bound = j.at("bound").get<real>();
  for (const auto& s : j.at("samples")) {
    std::vector<real> params;
    for (const auto& [key, val] : s.at("params").items()) {
      if (rep.values.empty()) rep.param_names.push_back(key);
      params.push_back(val.get<real>());
    }
    rep.add(std::move(params), s.at("value").get<real>());
  }
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Function serialization: piecewise data and mollified piecewise data use the
// flat {breakpoints, pieces, epsilon} layout; structural nodes nest.
// ---------------------------------------------------------------------------

inline Json to_json(const Term& t) {
  switch (t.kind) {
    case Term::Kind::Mono: return Json{{"form", "mono"}, {"c", t.c}, {"n", t.n}};
    case Term::Kind::MonoLog: return Json{{"form", "monolog"}, {"c", t.c}, {"n", t.n}};
    case Term::Kind::Sine: return Json{{"form", "sine"}, {"c", t.c}, {"w", t.w}, {"phi", t.phi}};
    case Term::Kind::Expo: return Json{{"form", "expo"}, {"c", t.c}, {"w", t.w}};
  }
  return {};
}

inline Json to_json(const PiecewiseFn& pw, real epsilon) {
  Json pieces = Json::array();
  for (const auto& piece : pw.pieces()) {
    Json terms = Json::array();
    for (const auto& t : piece.terms) terms.push_back(to_json(t));
    pieces.push_back(terms);
  }
  return Json{{"breakpoints", pw.breakpoints()}, {"pieces", pieces}, {"epsilon", epsilon}};
}

inline Json to_json(const SmoothFn& f) {
  if (const auto* pw = as_piecewise(f)) return to_json(*pw, 0.0);
  if (const auto* mn = as_mollified(f)) return to_json(mn->base(), mn->epsilon());
  if (const auto* sc = dynamic_cast<const ScaleNode*>(f.node()))
    return Json{{"type", "scale"}, {"theta", sc->theta()}, {"inner", to_json(sc->inner())}};
  if (const auto* rs = dynamic_cast<const RestrictNode*>(f.node()))
    return Json{{"type", "restrict"}, {"lo", rs->lo()}, {"hi", rs->hi()},
                {"inner", to_json(rs->inner())}};
  if (const auto* af = dynamic_cast<const AffineNode*>(f.node())) {
    Json members = Json::array();
    for (const auto& [a, g] : af->members())
      members.push_back({{"coef", a}, {"fn", to_json(g)}});
    return Json{{"type", "affine"}, {"c0", af->c0()}, {"c1", af->c1()}, {"members", members}};
  }
  if (const auto* cp = dynamic_cast<const ComposeNode*>(f.node()))
    return Json{{"type", "compose"}, {"outer", to_json(cp->outer())},
                {"inner", to_json(cp->inner())}};
  return Json{{"type", "opaque"}, {"lo", f.lo()}, {"hi", f.hi()}};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_torpedo_csv(std::ostream& os, const WarpSpec& w, int n) {
  os << "t,f,f1,f2,sigma\n";
  for (real t : linspace(0.0, w.r_bar, n)) {
    const Jet j = w.f.eval_jet(t, 2);
    os << t << "," << j.v << "," << j.d1 << "," << j.d2 << "," << sigma_warp(w, t) << "\n";
  }
}

inline void write_family_csv(std::ostream& os, const GLFamily& fam, int per_curve) {
  os << "lambda,s,y,r,theta,kappa,sigma_model\n";
  for (size_t ci = 0; ci < fam.curves.size(); ++ci) {
    const PlaneCurve& c = fam.curves[ci];
    const real lam = fam.lambda_grid[ci];
    const real total = c.s_max();
    for (size_t sp = 0; sp < c.span_count(); ++sp) {
      const auto& span = c.span(sp);
      const int n = std::max(4, int(std::lround(real(per_curve) * span.len / total)));
      for (int i = 0; i < n; ++i) {
        const real tau = span.len * real(i) / real(n);
        const CurveJet cj = c.jet_local(sp, tau);
        const real sig = (cj.r > 0)
                             ? scal_revolution_jet(cj, fam.params.k, fam.params.base_scal,
                                                   fam.cap_tiny)
                             : fam.params.base_scal;
        os << lam << "," << span.s0 + tau << "," << cj.y << "," << cj.r << "," << cj.theta << ","
           << cj.kappa << "," << sig << "\n";
      }
    }
  }
}

}  // namespace gllab
