#pragma once

// JSON forms of the result types. Spectra, lattices and symbols also read back.

#include <string>
#include <vector>

#include "revspec/analysis.hpp"
#include "revspec/bargmann.hpp"
#include "revspec/classical.hpp"
#include "revspec/io.hpp"
#include "revspec/normalform.hpp"
#include "revspec/quantization.hpp"
#include "revspec/spectra.hpp"

namespace revspec {

inline json to_json(const Interval& I) { return {{"lo", num(I.lo)}, {"hi", num(I.hi)}}; }

inline json to_json(const RotationClass& c) {
  json j = {{"kind", c.name()}};
  if (c.kind == RotationClass::Rational) {
    j["m"] = c.m;
    j["n"] = c.n;
    j["height"] = c.height;
  } else if (c.kind == RotationClass::DiophantineCertified) {
    j["alpha"] = c.alpha;
    j["d"] = c.d;
    j["q_max"] = c.q_max;
  } else {
    j["q_max"] = c.q_max;
  }
  return j;
}

inline json to_json(const ClassicalScan& s) {
  json rows = json::array(), rat = json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"a", r.a}, {"omega", num(r.omega)}, {"class", to_json(r.cls)}, {"q_avg", num(r.q_avg)},
                    {"q_inf", to_json(r.q_inf)}, {"T", r.T}});
  for (const auto& t : s.rational)
    rat.push_back({{"m", t.m}, {"n", t.n}, {"height", t.height}, {"a", t.a}, {"q_avg", num(t.q_avg)},
                   {"q_inf", to_json(t.q_inf)}, {"domega_da", num(t.domega_da)}});
  return {{"surface_id", s.surface_id}, {"q_id", s.q_id}, {"rows", rows}, {"rational", rat}};
}

inline json to_json(const WidthRow& r) {
  return {{"height", r.height}, {"m", r.m}, {"n", r.n}, {"a", r.a}, {"q_inf", to_json(r.q_inf)}, {"width", num(r.width)}};
}

inline json to_json(const Lattice& L) {
  json e = json::array();
  for (const auto& q : L.entries)
    e.push_back({{"k1", q.k1},
                 {"k2", q.k2},
                 {"E", q.E},
                 {"F", q.F},
                 {"re", q.z.real()},
                 {"im", q.z.imag()},
                 {"q_avg", num(q.q_avg)},
                 {"omega", num(q.omega)},
                 {"class", to_json(q.torus_class)},
                 {"near_equator", q.near_equator}});
  return {{"surface_id", L.surface_id},
          {"q_id", L.q_id},
          {"surface_hash", hash_string(L.surface_id)},
          {"q_hash", hash_string(L.q_id)},
          {"h", L.h},
          {"eps", L.eps},
          {"E_lo", L.E_lo},
          {"E_hi", L.E_hi},
          {"entries", e}};
}

inline Lattice lattice_from_json(const json& j) {
  Lattice L;
  L.surface_id = j.at("surface_id").get<std::string>();
  L.q_id = j.at("q_id").get<std::string>();
  L.h = j.at("h").get<double>();
  L.eps = j.at("eps").get<double>();
  L.E_lo = j.at("E_lo").get<double>();
  L.E_hi = j.at("E_hi").get<double>();
  for (const auto& e : j.at("entries")) {
    QuasiEigenvalue q;
    q.k1 = e.at("k1").get<long>();
    q.k2 = e.at("k2").get<long>();
    q.E = e.at("E").get<double>();
    q.F = e.at("F").get<double>();
    q.z = {e.at("re").get<double>(), e.at("im").get<double>()};
    q.q_avg = e.at("q_avg").is_null() ? NAN : e.at("q_avg").get<double>();
    q.omega = e.at("omega").is_null() ? NAN : e.at("omega").get<double>();
    q.near_equator = e.at("near_equator").get<bool>();
    L.entries.push_back(q);
  }
  return L;
}

inline json to_json(const SpectrumResult& s) {
  json e = json::array();
  for (const auto& p : s.eigen)
    e.push_back({{"re", p.value.real()},
                 {"im", p.value.imag()},
                 {"mode", p.mode},
                 {"residual", num(p.residual)},
                 {"mirror", p.mirror}});
  return {{"surface_id", s.surface_id},
          {"q_id", s.q_id},
          {"surface_hash", hash_string(s.surface_id)},
          {"q_hash", hash_string(s.q_id)},
          {"h", s.h},
          {"eps", s.eps},
          {"discretization", s.discretization},
          {"solver", s.solver},
          {"symmetry_note", s.symmetry_note},
          {"eigen", e}};
}

inline SpectrumResult spectrum_from_json(const json& j) {
  SpectrumResult s;
  s.surface_id = j.at("surface_id").get<std::string>();
  s.q_id = j.at("q_id").get<std::string>();
  s.h = j.at("h").get<double>();
  s.eps = j.at("eps").get<double>();
  s.discretization = j.at("discretization").get<std::string>();
  s.solver = j.at("solver").get<std::string>();
  s.symmetry_note = j.at("symmetry_note").get<std::string>();
  for (const auto& e : j.at("eigen")) {
    Eigenpair p;
    p.value = {e.at("re").get<double>(), e.at("im").get<double>()};
    p.mode = e.at("mode").get<int>();
    p.residual = e.at("residual").is_null() ? NAN : e.at("residual").get<double>();
    p.mirror = e.at("mirror").get<bool>();
    s.eigen.push_back(p);
  }
  return s;
}

inline json to_json(const WindowSpec& w) {
  return {{"F0", w.F0},
          {"C", w.C},
          {"eps", w.eps},
          {"delta", w.delta},
          {"E_center", w.E_center},
          {"rect", {w.rect.re_lo, w.rect.re_hi, w.rect.im_lo, w.rect.im_hi}}};
}

inline json to_json(const MatchReport& r) {
  json pairs = json::array(), us = json::array(), ul = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"re", p.eigenvalue.real()},
                     {"im", p.eigenvalue.imag()},
                     {"mode", p.mode},
                     {"k1", p.k1},
                     {"k2", p.k2},
                     {"lattice_re", p.z.real()},
                     {"lattice_im", p.z.imag()},
                     {"dist", p.distance}});
  for (const auto& e : r.unmatched_spectrum) us.push_back({{"re", e.value.real()}, {"im", e.value.imag()}, {"mode", e.mode}});
  for (const auto& q : r.unmatched_lattice)
    ul.push_back({{"k1", q.k1}, {"k2", q.k2}, {"re", q.z.real()}, {"im", q.z.imag()}});
  return {{"pairs", pairs},
          {"max_distance", r.max_distance},
          {"unmatched_spectrum", us},
          {"unmatched_lattice", ul},
          {"boundary_spectrum", r.boundary_spectrum},
          {"boundary_lattice", r.boundary_lattice},
          {"margin", r.margin},
          {"eps", r.eps},
          {"metric", r.metric}};
}

inline json to_json(const ScalingFit& f) {
  json pts = json::array();
  for (const auto& p : f.points) pts.push_back({{"eps", p.eps}, {"h", p.h}, {"count", p.count}});
  return {{"points", pts}, {"gamma", f.gamma}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

inline json to_json(const ReductionReport& r) {
  return {{"order", r.order},
          {"residual", r.residual},
          {"dropped_norm", r.dropped_norm},
          {"tail_norm", r.tail_norm},
          {"final_residual", r.final_residual},
          {"divergence_warning", r.divergence_warning}};
}

inline json to_json(const XiGrid& g) {
  return {{"lo1", g.lo1}, {"hi1", g.hi1}, {"n1", g.n1}, {"lo2", g.lo2}, {"hi2", g.hi2}, {"n2", g.n2}};
}

inline json to_json(const FourierTaylorSymbol& s) {
  json modes = json::array();
  for (const auto& [k, c] : s.coeffs) {
    std::vector<double> re, im;
    for (const auto& z : c) {
      re.push_back(z.real());
      im.push_back(z.imag());
    }
    modes.push_back({{"k", {k.first, k.second}}, {"re", re}, {"im", im}});
  }
  return {{"xi_grid", to_json(s.grid)}, {"K_max", s.K_max}, {"real_valued", s.real_valued}, {"modes", modes}};
}

inline FourierTaylorSymbol symbol_from_json(const json& j) {
  const auto& g = j.at("xi_grid");
  XiGrid grid{g.at("lo1").get<double>(), g.at("hi1").get<double>(), g.at("n1").get<int>(),
              g.at("lo2").get<double>(), g.at("hi2").get<double>(), g.at("n2").get<int>()};
  FourierTaylorSymbol s(grid, j.at("K_max").get<int>());
  s.real_valued = j.at("real_valued").get<bool>();
  for (const auto& m : j.at("modes")) {
    const Mode k{m.at("k")[0].get<int>(), m.at("k")[1].get<int>()};
    const auto re = m.at("re").get<std::vector<double>>(), im = m.at("im").get<std::vector<double>>();
    require(int(re.size()) == grid.size() && im.size() == re.size(), ErrorKind::GridMismatch,
            "coefficient array does not match the ξ-grid");
    auto& c = s.at(k);
    for (std::size_t i = 0; i < re.size(); ++i) c[i] = {re[i], im[i]};
  }
  return s;
}

inline json to_json(const TraceBoundReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"h", x.h},
                    {"M", x.M},
                    {"tail_bound", x.tail_bound},
                    {"trace", x.trace},
                    {"trace_norm", x.trace_norm},
                    {"mass", x.mass},
                    {"ratio", x.ratio},
                    {"min_eigen", x.min_eigen},
                    {"op_norm", x.op_norm},
                    {"trace_identity", x.trace_identity},
                    {"positivity", x.positivity}});
  return {{"symbol", r.symbol_id}, {"rows", rows}, {"passed", r.passed()}};
}

inline json to_json(const ParsevalReport& r) {
  json rows = json::array();
  for (const auto& x : r.rows)
    rows.push_back({{"k", x.k},
                    {"t_crit", x.t_crit},
                    {"legendre", x.legendre},
                    {"log_direct", x.log_direct},
                    {"log_laplace", x.log_laplace},
                    {"discrepancy", x.discrepancy}});
  return {{"weight", r.weight_id}, {"h", r.h}, {"rows", rows}, {"max_discrepancy", r.max_discrepancy()}};
}

inline json to_json(const GoodValueVerdict& v) {
  return {{"good", v.good},
          {"failed_bullet", v.failed_bullet},
          {"witness", v.witness},
          {"witness_a", num(v.witness_a)},
          {"family", v.family},
          {"height_cap", v.height_cap}};
}

}  // namespace revspec
