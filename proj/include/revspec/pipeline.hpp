#pragma once

// One function per CLI subcommand. Each computes its result from the config,
// writes <out>/<name>.csv and <out>/<name>.json, and returns a short summary.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "revspec/analysis.hpp"
#include "revspec/bargmann.hpp"
#include "revspec/classical.hpp"
#include "revspec/config.hpp"
#include "revspec/io.hpp"
#include "revspec/normalform.hpp"
#include "revspec/parallel.hpp"
#include "revspec/quantization.hpp"
#include "revspec/serialize.hpp"
#include "revspec/spectra.hpp"

namespace revspec {

struct RunContext {
  ExperimentConfig cfg;
  std::filesystem::path out;
  int threads = 1;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> spectrum_in;  // match only
  std::optional<std::filesystem::path> lattice_in;   // match only
};

struct RunOutcome {
  std::vector<std::filesystem::path> files;
  json summary;
};

namespace pipeline {

class Session {
 public:
  Session(const RunContext& ctx, std::string subcommand)
      : ctx_(ctx),
        surface_(build_surface(ctx.cfg.surface)),
        q_(build_observable(ctx.cfg.observable)),
        t0_(std::chrono::steady_clock::now()) {
    prov_.subcommand = std::move(subcommand);
    prov_.config_hash = config_hash(ctx.cfg);
    prov_.surface_hash = hash_string(surface_.id());
    prov_.q_hash = hash_string(q_.id());
    prov_.started = utc_now();
  }

  const ExperimentConfig& cfg() const { return ctx_.cfg; }
  const RunContext& ctx() const { return ctx_; }
  const SurfaceProfile& surface() const { return surface_; }
  const Observable& q() const { return q_; }

  // CSV and JSON land together, stamped with the same provenance.
  void emit(const std::string& name, const CsvTable& table, const json& data) {
    prov_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    const auto csv = ctx_.out / (name + ".csv"), js = ctx_.out / (name + ".json");
    write_csv(csv, table, prov_);
    write_json(js, data, prov_);
    outcome_.files.push_back(csv);
    outcome_.files.push_back(js);
  }

  RunOutcome finish(json summary) {
    outcome_.summary = std::move(summary);
    return outcome_;
  }

 private:
  const RunContext& ctx_;
  SurfaceProfile surface_;
  Observable q_;
  std::chrono::steady_clock::time_point t0_;
  Provenance prov_;
  RunOutcome outcome_;
};

inline Kernel kernel_from(const std::string& name) {
  return Kernel{name == "box" ? KernelKind::Box : KernelKind::Bump};
}

inline double window_F0(const Session& s) {
  const auto& W = s.cfg().window;
  return W.F0 ? *W.F0 : torus_average(s.surface(), s.q(), W.a0);
}

inline LatticeOptions lattice_options(const ExperimentConfig& c) {
  LatticeOptions o;
  o.q_max = c.lattice.q_max;
  o.alpha = c.lattice.alpha;
  o.d = c.lattice.d;
  return o;
}


}  // namespace pipeline

inline RunOutcome run_scan_classical(const RunContext& ctx) {
  pipeline::Session S(ctx, "scan-classical");
  const auto& A = ctx.cfg.scan;
  ScanOptions o;
  o.a_min = A.a_min;
  o.a_max_frac = A.a_max_frac;
  o.n_a = A.n_a;
  o.T = A.T;
  o.n_starts = A.n_starts;
  o.q_max = A.q_max;
  o.alpha = A.alpha;
  o.d = A.d;
  o.height_cap = A.height_cap;
  o.flow_qinf = A.flow_qinf;
  o.kernel = pipeline::kernel_from(A.kernel);
  const auto sc = scan(S.surface(), S.q(), o);

  CsvTable t{{"a", "omega", "class", "m", "n", "height", "q_avg", "qinf_lo", "qinf_hi", "T"}, {}};
  double omega_lo = INFINITY, omega_hi = -INFINITY;
  for (const auto& r : sc.rows) {
    const bool rat = r.cls.kind == RotationClass::Rational;
    t.add({r.a, r.omega, r.cls.name(), rat ? r.cls.m : 0L, rat ? r.cls.n : 0L, rat ? r.cls.height : 0L, r.q_avg,
           r.q_inf.lo, r.q_inf.hi, r.T});
    omega_lo = std::min(omega_lo, r.omega);
    omega_hi = std::max(omega_hi, r.omega);
  }
  S.emit("scan", t, to_json(sc));

  CsvTable rt{{"m", "n", "height", "a", "q_avg", "qinf_lo", "qinf_hi", "domega_da"}, {}};
  for (const auto& r : sc.rational) rt.add({r.m, r.n, r.height, r.a, r.q_avg, r.q_inf.lo, r.q_inf.hi, r.domega_da});
  S.emit("scan_rational", rt, to_json(sc)["rational"]);

  json summary = {{"rows", sc.rows.size()}, {"rational", sc.rational.size()}, {"omega_min", omega_lo},
                  {"omega_max", omega_hi}};
  if (ctx.cfg.width.enabled) {
    const auto& Wd = ctx.cfg.width;
    WidthOptions wo;
    wo.T = Wd.T;
    wo.n_starts = Wd.n_starts;
    wo.kernel = pipeline::kernel_from(Wd.kernel);
    const auto rows = width_vs_height(S.surface(), S.q(), Wd.a_lo, Wd.a_hi, Wd.heights, wo);
    CsvTable wt{{"height", "m", "n", "a", "qinf_lo", "qinf_hi", "width"}, {}};
    json wj = json::array();
    for (const auto& r : rows) {
      wt.add({r.height, r.m, r.n, r.a, r.q_inf.lo, r.q_inf.hi, r.width});
      wj.push_back(to_json(r));
    }
    S.emit("width", wt, wj);
    summary["width_rows"] = rows.size();
  }
  return S.finish(summary);
}

inline RunOutcome run_lattice(const RunContext& ctx) {
  pipeline::Session S(ctx, "lattice");
  const auto& c = ctx.cfg;
  CsvTable t{{"h", "eps", "k1", "k2", "E", "F", "re", "im", "q_avg", "omega", "class", "near_equator"}, {}};
  json runs = json::array();
  std::size_t n = 0;
  for (double h : c.h) {
    const double eps = c.eps_rule(h);
    const auto L = ebk_lattice(S.surface(), S.q(), h, eps, c.lattice.E_lo, c.lattice.E_hi, pipeline::lattice_options(c));
    for (const auto& e : L.entries)
      t.add({h, eps, e.k1, e.k2, e.E, e.F, e.z.real(), e.z.imag(), e.q_avg, e.omega, e.torus_class.name(),
             e.near_equator});
    n += L.entries.size();
    runs.push_back(to_json(L));
  }
  S.emit("lattice", t, {{"runs", runs}});
  return S.finish({{"points", n}});
}

namespace pipeline {

// Spectrum for one h, as configured. `w` restricts to the window when set.
inline SpectrumResult compute_spectrum(const Session& S, double h, double eps, const std::optional<WindowSpec>& w) {
  const auto& c = S.cfg();
  const auto& Sp = c.spectrum;
  ModeOptions mo;
  mo.form = Sp.form == "liouville" ? Discretization::Liouville : Discretization::Weighted;
  mo.E_top = Sp.E_top;
  mo.min_ppw = Sp.min_ppw;
  mo.min_N = Sp.min_N;
  EigenOptions eo;
  eo.residual_tol = Sp.residual_tol;
  eo.size_cap = Sp.size_cap;
  std::optional<Rect> rect;
  if (w) rect = detail::grow(w->rect, c.window.grow, c.window.grow * eps);

  if (Sp.kind == "2d") {
    Operator2DOptions o;
    o.mode = mo;
    o.size_cap = Sp.size_cap;
    return spectrum_2d(S.surface(), h, eps, S.q(), Sp.N, Sp.M_theta, o, rect, eo);
  }

  RotationalOptions o;
  o.mode = mo;
  o.richardson = Sp.richardson;
  o.rect = rect;
  o.eigen = eo;
  o.threads = S.ctx().threads;
  o.m_min = Sp.m_min;
  int m_max = Sp.m_max;
  if (m_max < 0) {
    m_max = static_cast<int>(std::ceil(S.surface().u_max() * std::sqrt(Sp.E_top) / h));
    if (rect) {
      // Modes carrying lattice points in the window, padded by 3.
      const auto L = ebk_lattice(S.surface(), S.q(), h, eps, std::max(rect->re_lo, 1e-12), rect->re_hi,
                                 lattice_options(c));
      long lo = -1, hi = -1;
      for (const auto& e : L.entries)
        if (rect->contains(e.z)) {
          const long k = std::abs(e.k2);
          lo = lo < 0 ? k : std::min(lo, k);
          hi = std::max(hi, k);
        }
      if (hi >= 0) {
        o.m_min = std::max<int>(Sp.m_min, int(lo) - 3);
        m_max = int(hi) + 3;
      }
    }
  }
  return full_spectrum_rotational(S.surface(), h, eps, S.q(), m_max, Sp.N, o);
}

inline std::optional<WindowSpec> spectrum_window(const Session& S, double eps) {
  const auto& c = S.cfg();
  if (!c.spectrum.restrict_to_window || eps <= 0.0) return std::nullopt;
  return window(window_F0(S), c.window.C, eps, c.window.delta, c.window.E_center);
}

inline CsvTable spectrum_table() { return {{"h", "eps", "re", "im", "mode", "residual", "mirror"}, {}}; }

inline void add_spectrum_rows(CsvTable& t, const SpectrumResult& s) {
  for (const auto& e : s.eigen)
    t.add({s.h, s.eps, e.value.real(), e.value.imag(), long(e.mode), e.residual, e.mirror});
}

}  // namespace pipeline

inline RunOutcome run_spectrum(const RunContext& ctx) {
  pipeline::Session S(ctx, "spectrum");
  auto t = pipeline::spectrum_table();
  json runs = json::array();
  std::size_t n = 0;
  for (double h : ctx.cfg.h) {
    const double eps = ctx.cfg.eps_rule(h);
    const auto sp = pipeline::compute_spectrum(S, h, eps, pipeline::spectrum_window(S, eps));
    pipeline::add_spectrum_rows(t, sp);
    runs.push_back(to_json(sp));
    n += sp.eigen.size();
  }
  S.emit("spectrum", t, {{"runs", runs}});
  return S.finish({{"eigenvalues", n}});
}

namespace pipeline {

inline const json& find_run(const json& doc, double h, const std::string& what) {
  const auto& data = doc.contains("data") ? doc.at("data") : doc;
  for (const auto& r : data.at("runs"))
    if (std::abs(r.at("h").get<double>() - h) <= 1e-14 * h) return r;
  fail(ErrorKind::ConfigError, what + " file has no run with h = " + format_double(h));
}

}  // namespace pipeline

/// Matches spectrum and lattice inside the window for each h. Inputs are
/// recomputed unless files are given; files must agree on surface and q hashes.
inline RunOutcome run_match(const RunContext& ctx) {
  pipeline::Session S(ctx, "match");
  const auto& c = ctx.cfg;
  const double F0 = pipeline::window_F0(S);
  std::optional<json> spec_doc, lat_doc;
  if (ctx.spectrum_in) spec_doc = read_json_file(*ctx.spectrum_in);
  if (ctx.lattice_in) lat_doc = read_json_file(*ctx.lattice_in);

  CsvTable t{{"h", "eps", "re", "im", "k1", "k2", "dist", "mode", "lattice_re", "lattice_im"}, {}};
  json reports = json::array();
  bool all_ok = true;
  for (double h : c.h) {
    const double eps = c.eps_rule(h);
    const auto w = window(F0, c.window.C, eps, c.window.delta, c.window.E_center);
    const Rect big = detail::grow(w.rect, c.window.grow, c.window.grow * eps);

    Lattice L;
    if (lat_doc) {
      L = lattice_from_json(pipeline::find_run(*lat_doc, h, "lattice"));
    } else {
      L = ebk_lattice(S.surface(), S.q(), h, eps, std::max(big.re_lo, 1e-12), big.re_hi, pipeline::lattice_options(c));
    }
    SpectrumResult sp;
    if (spec_doc) {
      sp = spectrum_from_json(pipeline::find_run(*spec_doc, h, "spectrum"));
    } else {
      sp = pipeline::compute_spectrum(S, h, eps, w);
    }
    if (hash_string(sp.surface_id) != hash_string(L.surface_id) || hash_string(sp.q_id) != hash_string(L.q_id))
      fail(ErrorKind::HashMismatch, "spectrum and lattice were computed for different surface/q (hash " +
                                        hash_string(sp.surface_id) + "/" + hash_string(sp.q_id) + " vs " +
                                        hash_string(L.surface_id) + "/" + hash_string(L.q_id) + ")");

    MatchOptions mo;
    mo.margin = c.window.margin_factor * (h * h + eps * eps);
    const auto rep = match_lattice(sp, L, w, mo);
    for (const auto& p : rep.pairs)
      t.add({h, eps, p.eigenvalue.real(), p.eigenvalue.imag(), p.k1, p.k2, p.distance, long(p.mode), p.z.real(),
             p.z.imag()});
    const double budget = 10.0 * (h * h + eps * eps);
    const bool ok = rep.unmatched_spectrum.empty() && rep.unmatched_lattice.empty() && rep.max_distance <= budget;
    all_ok = all_ok && ok;
    json r = to_json(rep);
    r["h"] = h;
    r["window"] = to_json(w);
    r["budget"] = budget;
    r["within_budget"] = ok;
    reports.push_back(r);
  }
  S.emit("match", t, {{"runs", reports}});
  return S.finish({{"within_budget", all_ok}, {"runs", reports.size()}});
}

namespace pipeline {

struct CountRun {
  double h = 0.0, eps = 0.0, E_top = 0.0;
  int M_theta = 0, N_s = 0;
  double count = 0.0;
  std::size_t total = 0;
};

// Coupled-2d spectrum at fixed points per wavelength, counted in the δ = 0 rectangle.
inline CountRun count_at(const SurfaceProfile& surface, const Observable& q, const CountSection& cs, double F0,
                         double h, double eps) {
  CountRun r;
  r.h = h;
  r.eps = eps;
  r.E_top = cs.E_center + eps / cs.C + 0.05;
  r.M_theta = int(std::ceil(surface.u_max() * std::sqrt(r.E_top) / h)) + cs.M_margin;
  r.N_s = int(std::ceil(cs.min_ppw * surface.length() * std::sqrt(r.E_top) / (2.0 * std::numbers::pi * h)));
  Operator2DOptions o;
  o.mode.E_top = r.E_top;
  o.mode.min_ppw = cs.min_ppw;
  o.mode.min_N = 8;
  o.size_cap = cs.size_cap;
  EigenOptions eo;
  eo.size_cap = cs.size_cap;
  const auto sp = spectrum_2d(surface, h, eps, q, r.N_s, r.M_theta, o, std::nullopt, eo);
  r.count = double(count_rational_window(sp, F0, cs.C, eps, cs.E_center));
  r.total = sp.eigen.size();
  return r;
}

}  // namespace pipeline

inline RunOutcome run_count_scaling(const RunContext& ctx) {
  pipeline::Session S(ctx, "count-scaling");
  const auto& cs = ctx.cfg.count_scaling;
  const double F0 = cs.F0 ? *cs.F0 : torus_average(S.surface(), S.q(), cs.a0);
  const int n = int(cs.h.size());
  std::vector<pipeline::CountRun> runs(n);
  if (cs.synthetic) {
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      auto& r = runs[i];
      r.h = cs.h[i];
      r.eps = ctx.cfg.eps_rule(r.h);
      const double v = std::pow(r.eps, cs.synthetic_gamma) / (r.h * r.h) * (1.0 + cs.synthetic_noise * U(rng));
      r.count = v;
    }
  } else {
    parallel_for(n, ctx.threads, [&](int i) {
      runs[i] = pipeline::count_at(S.surface(), S.q(), cs, F0, cs.h[i], ctx.cfg.eps_rule(cs.h[i]));
    });
  }
  std::vector<ScalingPoint> pts;
  CsvTable t{{"h", "eps", "count", "E_top", "M_theta", "N_s", "total"}, {}};
  for (const auto& r : runs) {
    pts.push_back({r.eps, r.h, r.count});
    t.add({r.h, r.eps, r.count, r.E_top, long(r.M_theta), long(r.N_s), long(r.total)});
  }
  const auto fit = scaling_fit(pts);
  json data = to_json(fit);
  data["F0"] = F0;
  data["C"] = cs.C;
  data["E_center"] = cs.E_center;
  data["synthetic"] = cs.synthetic;
  data["reference_gamma"] = 1.5;
  S.emit("count_scaling", t, data);
  return S.finish({{"gamma", fit.gamma}, {"r_squared", fit.r_squared}});
}

inline RunOutcome run_normalform(const RunContext& ctx) {
  pipeline::Session S(ctx, "normalform");
  const auto& N = ctx.cfg.normalform;
  const XiGrid g{N.xi1_lo, N.xi1_hi, N.n1, N.xi2_lo, N.xi2_hi, N.n2};
  const auto p = test_symbols::p_standard(g, N.K_max);
  const auto q = test_symbols::q_standard(g, N.K_max);

  CsvTable steps{{"eps", "step", "residual", "dropped_norm", "tail_norm"}, {}};
  json reports = json::array();
  std::optional<FourierTaylorSymbol> nf;
  std::vector<double> first;
  for (double eps : {N.eps, 0.5 * N.eps}) {
    const auto r = secular_reduce(p, q, eps, N.N, N.lie_order, N.floor);
    for (int j = 0; j < r.report.order; ++j)
      steps.add({eps, long(j + 1), r.report.residual[j], r.report.dropped_norm[j], r.report.tail_norm[j]});
    json rj = to_json(r.report);
    rj["eps"] = eps;
    reports.push_back(rj);
    first.push_back(r.report.residual.front());
    if (!nf) nf = r.normal_form;
  }
  std::mt19937_64 rng(ctx.seed);
  std::normal_distribution<double> G;
  auto next = [&] { return G(rng); };
  const double hom = homological_defect(p, test_symbols::random_trig(g, N.K_max, next), N.floor);

  const XiGrid gb{-N.bound_xi1, N.bound_xi1, N.bound_n1, N.xi2_lo, N.xi2_hi, 3};
  const auto pb = test_symbols::p_standard(gb, N.K_max);
  const auto qb = test_symbols::q_flat(gb, N.K_max);
  CsvTable bound{{"T", "C", "gt_defect"}, {}};
  json bj = json::array();
  double cmin = INFINITY, cmax = 0.0, gmax = 0.0;
  for (double T : N.T) {
    const double C = gt_bound_constant(pb, qb, T);
    const double d = gt_defect(p, q, T);
    bound.add({T, C, d});
    bj.push_back({{"T", T}, {"C", C}, {"gt_defect", d}});
    cmin = std::min(cmin, C);
    cmax = std::max(cmax, C);
    gmax = std::max(gmax, d);
  }
  const double ratio = first[0] / first[1];
  S.emit("normalform_steps", steps,
         {{"reports", reports}, {"halving_ratio", ratio}, {"homological_defect", hom}, {"normal_form", to_json(*nf)}});
  S.emit("normalform_bound", bound, {{"rows", bj}, {"C_spread", cmax / cmin}, {"gt_defect_max", gmax}});
  return S.finish({{"halving_ratio", ratio}, {"homological_defect", hom}, {"gt_defect_max", gmax}, {"C_spread", cmax / cmin}});
}

namespace pipeline {

inline PlaneSymbol plane_symbol(const ToeplitzSection& t) {
  if (t.symbol == "disc") return symbols::disc(t.R);
  if (t.symbol == "bump-lobed") return symbols::lobed_bump(t.R);
  return symbols::bump(t.R);
}

}  // namespace pipeline

inline RunOutcome run_toeplitz_bench(const RunContext& ctx) {
  pipeline::Session S(ctx, "toeplitz-bench");
  const auto& Tp = ctx.cfg.toeplitz;
  const auto rep = verify_trace_bound(pipeline::plane_symbol(Tp), Tp.h, Tp.tail_tol);
  CsvTable t{{"h", "M", "trace", "trace_norm", "mass", "ratio", "min_eigen", "op_norm", "tail_bound"}, {}};
  for (const auto& r : rep.rows)
    t.add({r.h, long(r.M), r.trace, r.trace_norm, r.mass, r.ratio, r.min_eigen, r.op_norm, r.tail_bound});
  S.emit("toeplitz", t, to_json(rep));

  // Legendre involution on a seeded convex quartic, and the weight duality.
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> U(0.1, 1.0), V(-0.5, 0.5);
  const double a = U(rng), b = U(rng), c = V(rng);
  const auto f = SampledFunction::sample([&](double x) { return a * x * x * x * x + b * x * x + c * x; }, -1.0, 1.0,
                                         Tp.legendre_n);
  const double inv = legendre_involution_defect(f);
  const auto dual = weight_duality([](double e) { return std::cos(e) + 0.1 * e * e * e; }, 0.3, -1.0, 1.0, Tp.legendre_n);

  CsvTable pt{{"h", "k", "t_crit", "legendre", "discrepancy"}, {}};
  json pj = json::array();
  std::vector<double> maxd;
  for (double h : Tp.parseval_h) {
    const auto pr = parseval_check(weights::quartic(Tp.parseval_quartic), h, Tp.k_lo, Tp.k_hi);
    for (const auto& r : pr.rows) pt.add({h, r.k, r.t_crit, r.legendre, r.discrepancy});
    pj.push_back(to_json(pr));
    maxd.push_back(pr.max_discrepancy());
  }
  json data = {{"parseval", pj},
               {"legendre", {{"quartic", {a, b, c}}, {"defect", inv}, {"bound", 5.0 * f.dx * f.dx}}},
               {"duality", {{"defect", dual.defect}, {"grid_spacing", dual.grid_spacing}}}};
  S.emit("parseval", pt, data);
  return S.finish({{"trace_bound_passed", rep.passed()}, {"legendre_defect", inv}, {"duality_defect", dual.defect}});
}

inline RunOutcome run_good_values(const RunContext& ctx) {
  pipeline::Session S(ctx, "good-values");
  const auto& A = ctx.cfg.scan;
  const auto& G = ctx.cfg.good_values;
  ScanOptions o;
  o.a_min = A.a_min;
  o.a_max_frac = A.a_max_frac;
  o.n_a = A.n_a;
  o.T = A.T;
  o.n_starts = A.n_starts;
  o.q_max = A.q_max;
  o.alpha = A.alpha;
  o.d = A.d;
  o.height_cap = A.height_cap;
  o.flow_qinf = A.flow_qinf;
  o.kernel = pipeline::kernel_from(A.kernel);
  const auto sc = scan(S.surface(), S.q(), o);

  const int n = G.n_F0;
  std::vector<double> F0s(n);
  for (int i = 0; i < n; ++i) F0s[i] = n == 1 ? G.F0_lo : G.F0_lo + (G.F0_hi - G.F0_lo) * i / (n - 1);
  std::vector<GoodValueVerdict> verdicts(n);
  parallel_for(n, ctx.threads, [&](int i) {
    verdicts[i] = good_value_check(S.surface(), S.q(), sc, F0s[i], G.alpha, G.beta, G.gamma, G.d);
  });
  CsvTable t{{"F0", "good", "failed_bullet", "witness_a", "witness"}, {}};
  json vj = json::array();
  long good = 0;
  for (int i = 0; i < n; ++i) {
    const auto& v = verdicts[i];
    t.add({F0s[i], v.good, long(v.failed_bullet), v.witness_a, v.witness});
    json j = to_json(v);
    j["F0"] = F0s[i];
    vj.push_back(j);
    good += v.good;
  }
  S.emit("good_values", t, {{"verdicts", vj}, {"alpha", G.alpha}, {"beta", G.beta}, {"gamma", G.gamma}, {"d", G.d}});
  return S.finish({{"good", good}, {"total", n}});
}

}  // namespace revspec
