// Acceptance run: one PASS/FAIL line per criterion 1-10.
//   acceptance [--only N[,N...]] [--skip N[,N...]]
// Exit status is nonzero when any criterion that ran failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "revspec/analysis.hpp"
#include "revspec/bargmann.hpp"
#include "revspec/classical.hpp"
#include "revspec/normalform.hpp"
#include "revspec/quantization.hpp"
#include "revspec/spectra.hpp"

using namespace revspec;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. EBK on the round sphere reduces to h²(ℓ(ℓ+1) + 1/4).
Verdict sphere_ebk() {
  const auto S = make_profile("sphere", {});
  const auto q = observables::constant(0.0);
  double worst = 0.0;
  std::size_t n = 0;
  for (double h : {0.1, 0.05}) {
    const auto L = ebk_lattice(S, q, h, 0.0, 0.5, 2.0);
    for (const auto& e : L.entries) {
      const double l = double(e.k1 + std::abs(e.k2));
      worst = std::max(worst, std::abs(e.E - h * h * l * (l + 1.0) - h * h / 4.0));
      ++n;
    }
  }
  return {n > 0 && worst <= 1e-12, fmt("%zu lattice points, max |E - h^2 l(l+1) - h^2/4| = %.2e (tol 1e-12)", n, worst)};
}

// 2. Rotational spectrum of the round sphere at h = 1.
Verdict sphere_spectrum() {
  const auto S = make_profile("sphere", {});
  RotationalOptions o;
  o.mode.E_top = 50.0;
  o.richardson = true;
  o.rect = Rect{-1.0, 50.0, -1.0, 1.0};
  const auto r = full_spectrum_rotational(S, 1.0, 0.0, observables::constant(0.0), 6, 2000, o);
  std::vector<int> mult(7, 0);
  double err = 0.0;
  for (const auto& p : r.eigen) {
    const double l = std::round((-1.0 + std::sqrt(1.0 + 4.0 * std::max(p.value.real(), 0.0))) / 2.0);
    if (l > 6) continue;
    err = std::max(err, std::abs(p.value - cplx(l * (l + 1.0))));
    ++mult[int(l)];
  }
  bool mult_ok = true;
  for (int l = 0; l <= 6; ++l) mult_ok = mult_ok && mult[l] == 2 * l + 1;
  return {err <= 1e-4 && mult_ok,
          fmt("max |λ - l(l+1)| = %.2e (tol 1e-4), multiplicities 2l+1 %s", err, mult_ok ? "ok" : "WRONG")};
}

// 3. Window around a certified torus on β = 0.2, q = cos 2s, h = 0.01.
Verdict window_match() {
  const auto S = make_profile("deformed-sphere", {0.2});
  const auto q = observables::cos_ks(2);
  const double h = 0.01, eps = std::pow(h, 0.8), a0 = 0.6;
  const auto cls = classify(rotation_number(S, a0), 1000, 0.01, 0.5);
  const double F0 = torus_average(S, q, a0);
  const auto w = window(F0, 2.0, eps, 0.3, 1.0);
  const Rect big = detail::grow(w.rect, 0.01, 0.01 * eps);
  const auto L = ebk_lattice(S, q, h, eps, big.re_lo, big.re_hi);
  long lo = -1, hi = -1;
  for (const auto& e : L.entries)
    if (w.rect.contains(e.z)) {
      const long k = std::abs(e.k2);
      lo = lo < 0 ? k : std::min(lo, k);
      hi = std::max(hi, k);
    }
  if (hi < 0) return {false, "no lattice points in the window"};
  RotationalOptions o;
  o.m_min = int(std::max(0L, lo - 3));
  o.richardson = true;
  o.rect = big;
  o.mode.E_top = 1.1;
  const auto sp = full_spectrum_rotational(S, h, eps, q, int(hi + 3), 2000, o);
  MatchOptions mo;
  mo.margin = 2.5 * (h * h + eps * eps);
  const auto rep = match_lattice(sp, L, w, mo);
  const double budget = 10.0 * (h * h + eps * eps);
  const bool ok = cls.kind == RotationClass::DiophantineCertified && !rep.pairs.empty() &&
                  rep.unmatched_spectrum.empty() && rep.unmatched_lattice.empty() && rep.max_distance <= budget;
  return {ok, fmt("torus %s, %zu pairs, unmatched %zu/%zu, max distance %.2e (budget %.2e)", cls.name().c_str(),
                  rep.pairs.size(), rep.unmatched_spectrum.size(), rep.unmatched_lattice.size(), rep.max_distance,
                  budget)};
}

double terminal_slope(const std::vector<WidthRow>& rows) {
  const auto& a = rows[rows.size() - 2];
  const auto& b = rows.back();
  return std::log(b.width / a.width) / std::log(double(b.height) / double(a.height));
}

std::string width_report(const std::vector<WidthRow>& rows, bool& decreasing, double& slope) {
  std::ostringstream os;
  decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << (i ? " " : "") << rows[i].height << ":" << fmt("%.2e", rows[i].width);
    if (i && !(rows[i].width < rows[i - 1].width)) decreasing = false;
  }
  slope = rows.size() >= 2 ? terminal_slope(rows) : NAN;
  return os.str();
}

// 4. Widths of Q∞ at rational tori of heights 3, 5, 7, 9.
Verdict rational_widths() {
  const auto S = make_profile("deformed-sphere", {0.2});
  const auto q = observables::sum(observables::cos_ks(2), observables::cos_theta(1));
  std::string primary;
  bool ok = false;
  try {
    const auto rows = width_vs_height(S, q, 0.05, 1.17, {3, 5, 7, 9});
    bool dec;
    double slope;
    const auto s = width_report(rows, dec, slope);
    ok = dec && slope <= -4.0;
    primary = fmt("widths %s, terminal slope %.2f", s.c_str(), slope);
  } catch (const Error& e) {
    primary = e.what();
  }
  // Heights that exist inside ω(a) ⊂ (0.72, 1) on this profile.
  std::string aux;
  try {
    WidthOptions wo;
    wo.T = 1500.0;
    wo.n_starts = 32;
    const auto rows = width_vs_height(S, observables::exp_x(0.5, 9, 0.5), 0.06, 1.17, {7, 9, 11, 13}, wo);
    bool dec;
    double slope;
    const auto s = width_report(rows, dec, slope);
    aux = fmt("auxiliary heights {7,9,11,13}: %s, decreasing %s, terminal slope %.2f", s.c_str(), dec ? "yes" : "no",
              slope);
  } catch (const Error& e) {
    aux = std::string("auxiliary run failed: ") + e.what();
  }
  return {ok, primary + " | " + aux};
}

// 5. Window counts along ε = h^0.8 from coupled 2d spectra.
Verdict count_scaling() {
  const auto S = make_profile("deformed-sphere", {0.2});
  const auto q = observables::sum(observables::cos_ks(2), observables::exp_x(0.5, 4, 0.5));
  const double F0 = torus_average(S, q, 0.6), C = 2.0, Ec = 1.0, ppw = 12.0;
  std::vector<ScalingPoint> pts;
  std::ostringstream os;
  std::size_t biggest = 0;
  for (double h : {0.08, 0.06, 0.05}) {
    const double eps = std::pow(h, 0.8);
    const double E_top = Ec + eps / C + 0.05;
    const int M = int(std::ceil(S.u_max() * std::sqrt(E_top) / h)) + 2;
    const int N_s = int(std::ceil(ppw * S.length() * std::sqrt(E_top) / (2.0 * std::numbers::pi * h)));
    Operator2DOptions o;
    o.mode.E_top = E_top;
    o.mode.min_ppw = ppw;
    o.mode.min_N = 40;
    o.size_cap = 4000;
    EigenOptions eo;
    eo.size_cap = 4000;
    const auto sp = spectrum_2d(S, h, eps, q, N_s, M, o, std::nullopt, eo);
    const long n = count_rational_window(sp, F0, C, eps, Ec);
    pts.push_back({eps, h, double(n)});
    biggest = std::max(biggest, sp.eigen.size());
    os << fmt(" h=%g:%ld", h, n);
  }
  const auto fit = scaling_fit(pts);
  return {fit.gamma >= 1.0 && fit.gamma <= 2.0,
          fmt("counts%s, gamma %.3f (reference 1.5, accepted [1, 2]), r^2 %.3f, largest spectrum %zu eigenvalues", os.str().c_str(),
              fit.gamma, fit.r_squared, biggest)};
}

// 6. Homological identities and the ε-halving of the secular residual.
Verdict homological() {
  const XiGrid g{-0.1, 0.1, 41, -0.1, 0.1, 5};
  const int K = 3;
  const auto p = test_symbols::p_standard(g, K);
  const auto q = test_symbols::q_standard(g, K);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  auto next = [&] { return N(rng); };
  const double hom = homological_defect(p, test_symbols::random_trig(g, K, next));
  double gt = 0.0;
  for (double T : {10.0, 100.0, 1000.0}) gt = std::max(gt, gt_defect(p, q, T));
  const double r1 = secular_reduce(p, q, 0.02, 2, 3).report.residual.front();
  const double r2 = secular_reduce(p, q, 0.01, 2, 3).report.residual.front();
  const double ratio = r1 / r2;
  return {hom <= 1e-10 && gt <= 1e-9 && std::abs(ratio - 4.0) <= 0.8,
          fmt("homological %.2e (tol 1e-10), G_T %.2e (tol 1e-9), halving ratio %.3f (4 ± 0.8)", hom, gt, ratio)};
}

// 7. sup|G_T| ≤ C(1 + T/(T|ξ1|+1)) with C stable in T.
Verdict gt_bound() {
  const XiGrid g{-0.3, 0.3, 601, -0.05, 0.05, 3};
  const auto p = test_symbols::p_standard(g, 3);
  const auto q = test_symbols::q_flat(g, 3);
  double lo = INFINITY, hi = 0.0;
  std::ostringstream os;
  for (double T : {10.0, 100.0, 1000.0}) {
    const double C = gt_bound_constant(p, q, T);
    lo = std::min(lo, C);
    hi = std::max(hi, C);
    os << fmt(" T=%g:%.4f", T, C);
  }
  return {hi / lo < 2.0, fmt("C%s, spread %.3f (< 2)", os.str().c_str(), hi / lo)};
}

// 8. Trace identity and positivity for the Toeplitz quantization of the bump.
Verdict toeplitz_trace() {
  const auto rep = verify_trace_bound(symbols::bump(1.0), {0.2, 0.1, 0.05});
  double dr = 0.0, dt = 0.0;
  for (const auto& r : rep.rows) {
    dr = std::max(dr, std::abs(r.ratio - 1.0));
    dt = std::max(dt, std::abs(r.trace_norm - r.trace));
  }
  return {rep.passed() && dr <= 1e-6 && dt <= 1e-8,
          fmt("max |tr·πh/‖p‖₁ - 1| = %.2e (tol 1e-6), max |‖T‖_tr - tr| = %.2e (tol 1e-8)", dr, dt)};
}

// 9. Legendre involution, weight duality, Parseval discrepancy under h-doubling.
Verdict dualities() {
  const auto f = SampledFunction::sample([](double t) { return 0.3 * t * t * t * t + 0.5 * t * t + 0.2 * t; }, -1.0,
                                         1.0, 201);
  const double inv = legendre_involution_defect(f), inv_tol = 5.0 * f.dx * f.dx;
  const auto d = weight_duality([](double e) { return std::cos(e) + 0.1 * e * e * e; }, 0.3, -1.0, 1.0, 201);
  const double d_tol = 5.0 * d.grid_spacing * d.grid_spacing;
  std::vector<double> disc;
  for (double h : {0.05, 0.1, 0.2}) disc.push_back(parseval_check(weights::quartic(0.1), h, 0, 5).max_discrepancy());
  const double r1 = disc[1] / disc[0], r2 = disc[2] / disc[1];
  const bool pr = std::abs(r1 - 2.0) <= 0.8 && std::abs(r2 - 2.0) <= 0.8;
  return {inv <= inv_tol && d.defect <= d_tol && pr,
          fmt("involution %.2e (tol %.2e), duality %.2e (tol %.2e), Parseval ratios %.2f %.2f (2 ± 0.8)", inv, inv_tol,
              d.defect, d_tol, r1, r2)};
}

// 10. Rotation-number classification.
Verdict classification() {
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  const auto g = classify(golden, 1000, 0.01, 0.5);
  const auto half = classify(0.5, 1000, 0.01, 0.5);
  ScanOptions o;
  o.n_a = 40;
  o.flow_qinf = false;
  const auto sc = scan(make_profile("sphere", {}), observables::constant(1.0), o);
  double dev = 0.0;
  for (const auto& r : sc.rows) dev = std::max(dev, std::abs(r.omega - 1.0));
  const bool ok = g.kind == RotationClass::DiophantineCertified && half.kind == RotationClass::Rational &&
                  half.m == 1 && half.n == 2 && dev <= 1e-9 && !sc.rows.empty();
  return {ok, fmt("golden %s, 1/2 -> %s{%ld,%ld}, sphere max |ω - 1| = %.2e over %zu tori", g.name().c_str(),
                  half.name().c_str(), half.m, half.n, dev, sc.rows.size())};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

std::set<int> parse_ids(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.insert(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string only, skip;
  app.add_option("--only", only, "comma-separated criteria to run");
  app.add_option("--skip", skip, "comma-separated criteria to skip");
  CLI11_PARSE(app, argc, argv);
  const auto only_set = parse_ids(only), skip_set = parse_ids(skip);

  const std::vector<Criterion> all = {
      {1, "sphere EBK identity", 1.0, sphere_ebk},
      {2, "sphere spectrum oracle", 120.0, sphere_spectrum},
      {3, "window match, beta=0.2, h=0.01", 600.0, window_match},
      {4, "rational Q_inf widths", 300.0, rational_widths},
      {5, "count scaling [extended]", 3600.0, count_scaling},
      {6, "homological identities", 30.0, homological},
      {7, "G_T bound pattern", 60.0, gt_bound},
      {8, "Toeplitz trace identity", 60.0, toeplitz_trace},
      {9, "Legendre/Parseval dualities", 60.0, dualities},
      {10, "classification", 10.0, classification},
  };
  int failed = 0;
  for (const auto& c : all) {
    if ((!only_set.empty() && !only_set.count(c.id)) || skip_set.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = t <= c.budget_s;
    const bool pass = v.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %s: %s | %s | %.2f s (budget %g s%s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), t, c.budget_s, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
