#pragma once

// Experiment configuration: JSON in, validated struct out, and back.
// Every key is optional; missing keys take the defaults below. Unknown keys
// are rejected so typos surface as errors naming the field.

#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "revspec/errors.hpp"
#include "revspec/geometry.hpp"
#include "revspec/io.hpp"
#include "revspec/observable.hpp"

namespace revspec {

class ConfigFieldError : public Error {
 public:
  ConfigFieldError(std::string field, const std::string& what)
      : Error(ErrorKind::ConfigError, field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SurfaceSpec {
  std::string family = "deformed-sphere";
  std::vector<double> params{0.2};
};

struct ObservableSpec {
  // constant | cos-ks | cos-theta | harmonic | exp-x
  std::string builtin = "cos-ks";
  int k = 2;               // cos-ks
  int j = 1;               // cos-theta, harmonic
  double amplitude = 1.0;  // cos-theta, harmonic
  double c = 0.0;          // constant
  double kappa = 0.5;      // exp-x
  int degree = 4;          // exp-x
  double tilt = 0.0;       // exp-x
  std::vector<ObservableSpec> plus;
};

struct EpsRule {
  double p = 0.8;
  double c = 1.0;
  double operator()(double h) const { return c * std::pow(h, p); }
};

struct LatticeSection {
  double E_lo = 0.9;
  double E_hi = 1.1;
  long q_max = 1000;
  double alpha = 0.01;
  double d = 0.5;
};

struct SpectrumSection {
  std::string kind = "rotational";  // rotational | 2d
  std::string form = "weighted";    // weighted | liouville
  int N = 2000;
  int m_min = 0;
  int m_max = -1;  // -1: derived from the window's lattice points (±3)
  bool richardson = true;
  double E_top = 1.1;
  double min_ppw = 20.0;
  int min_N = 200;
  double residual_tol = 1e-8;
  int size_cap = 6000;
  int M_theta = 8;
  bool restrict_to_window = true;
};

struct WindowSection {
  std::optional<double> F0;  // default: ⟨q⟩ on the torus a0
  double a0 = 0.6;
  double C = 2.0;
  double delta = 0.3;
  double E_center = 1.0;
  double margin_factor = 2.5;  // margin = factor·(h² + ε²)
  double grow = 0.01;
};

struct ScanSection {
  double a_min = 0.05;
  double a_max_frac = 0.98;
  int n_a = 120;
  double T = 200.0;
  int n_starts = 16;
  long q_max = 1000;
  double alpha = 0.01;
  double d = 0.5;
  long height_cap = 30;
  bool flow_qinf = true;
  std::string kernel = "bump";
};

struct WidthSection {
  bool enabled = false;  // scan-classical also writes width_vs_height rows
  double a_lo = 0.05;
  double a_hi = 1.17;
  std::vector<long> heights{3, 5, 7, 9};
  double T = 400.0;
  int n_starts = 32;
  std::string kernel = "bump";
};

struct CountSection {
  std::vector<double> h{0.08, 0.06, 0.05};
  std::optional<double> F0;
  double a0 = 0.6;
  double C = 2.0;
  double E_center = 1.0;
  double min_ppw = 12.0;
  int size_cap = 4000;
  int M_margin = 2;
  // Seeded synthetic counts (ε^gamma / h² times uniform noise), no eigensolves.
  bool synthetic = false;
  double synthetic_gamma = 1.5;
  double synthetic_noise = 0.2;
};

struct NormalformSection {
  double xi1_lo = -0.1, xi1_hi = 0.1;
  int n1 = 41;
  double xi2_lo = -0.1, xi2_hi = 0.1;
  int n2 = 5;
  int K_max = 3;
  double eps = 0.02;
  int N = 2;
  int lie_order = 3;
  double floor = 1e-6;
  std::vector<double> T{10.0, 100.0, 1000.0};
  double bound_xi1 = 0.3;
  int bound_n1 = 601;
};

struct ToeplitzSection {
  std::string symbol = "bump";  // bump | bump-lobed | disc
  double R = 1.0;
  std::vector<double> h{0.2, 0.1, 0.05};
  double tail_tol = 1e-8;
  int legendre_n = 201;
  std::vector<double> parseval_h{0.05, 0.1, 0.2};
  double parseval_quartic = 0.1;
  long k_lo = 0;
  long k_hi = 5;
};

struct GoodValuesSection {
  double F0_lo = 0.5;
  double F0_hi = 1.0;
  int n_F0 = 11;
  double alpha = 0.01;
  double beta = 0.1;
  double gamma = 0.001;
  double d = 0.5;
};

struct ExperimentConfig {
  SurfaceSpec surface;
  ObservableSpec observable;
  std::vector<double> h{0.01};
  EpsRule eps_rule;
  LatticeSection lattice;
  SpectrumSection spectrum;
  WindowSection window;
  ScanSection scan;
  WidthSection width;
  CountSection count_scaling;
  NormalformSection normalform;
  ToeplitzSection toeplitz;
  GoodValuesSection good_values;
  std::string output_dir = "out";
};

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigFieldError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigFieldError(field(key), "has the wrong type");
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigFieldError(field(key), "has the wrong type");
    }
  }

  std::optional<Reader> sub(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), field(key));
  }

  const json& raw() const { return j_; }
  void mark(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigFieldError(field(it.key()), "unknown key");
  }

  void check(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) throw ConfigFieldError(field(key), what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline ObservableSpec read_observable(Reader r) {
  ObservableSpec s;
  r.get("builtin", s.builtin);
  r.get("k", s.k);
  r.get("j", s.j);
  r.get("amplitude", s.amplitude);
  r.get("c", s.c);
  r.get("kappa", s.kappa);
  r.get("degree", s.degree);
  r.get("tilt", s.tilt);
  static const std::set<std::string> known{"constant", "cos-ks", "cos-theta", "harmonic", "exp-x"};
  r.check(known.count(s.builtin) > 0, "builtin", "unknown observable '" + s.builtin + "'");
  r.check(s.k >= 0, "k", "must be >= 0");
  r.check(s.j >= 0, "j", "must be >= 0");
  r.check(s.degree >= 0, "degree", "must be >= 0");
  r.mark("plus");
  if (r.raw().contains("plus")) {
    const auto& arr = r.raw().at("plus");
    r.check(arr.is_array(), "plus", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i)
      s.plus.push_back(read_observable(Reader(arr[i], r.field("plus") + "[" + std::to_string(i) + "]")));
  }
  r.finish();
  return s;
}

}  // namespace detail

inline json to_json(const ObservableSpec& s) {
  json j = {{"builtin", s.builtin}, {"k", s.k},         {"j", s.j},         {"amplitude", s.amplitude},
            {"c", s.c},             {"kappa", s.kappa}, {"degree", s.degree}, {"tilt", s.tilt}};
  json plus = json::array();
  for (const auto& p : s.plus) plus.push_back(to_json(p));
  j["plus"] = plus;
  return j;
}

inline SurfaceProfile build_surface(const SurfaceSpec& s) { return make_profile(s.family, s.params); }

inline Observable build_observable(const ObservableSpec& s) {
  Observable q;
  if (s.builtin == "constant")
    q = observables::constant(s.c);
  else if (s.builtin == "cos-ks")
    q = observables::cos_ks(s.k);
  else if (s.builtin == "cos-theta")
    q = observables::cos_theta(s.j, s.amplitude);
  else if (s.builtin == "harmonic")
    q = observables::harmonic(s.j, s.amplitude);
  else if (s.builtin == "exp-x")
    q = observables::exp_x(s.kappa, s.degree, s.tilt);
  else
    throw ConfigFieldError("observable.builtin", "unknown observable '" + s.builtin + "'");
  for (const auto& p : s.plus) q = observables::sum(q, build_observable(p));
  return q;
}

inline json to_json(const ExperimentConfig& c) {
  json j;
  j["surface"] = {{"family", c.surface.family}, {"params", c.surface.params}};
  j["observable"] = to_json(c.observable);
  j["h"] = c.h;
  j["eps_rule"] = {{"p", c.eps_rule.p}, {"c", c.eps_rule.c}};
  const auto& L = c.lattice;
  j["lattice"] = {{"E_lo", L.E_lo}, {"E_hi", L.E_hi}, {"q_max", L.q_max}, {"alpha", L.alpha}, {"d", L.d}};
  const auto& S = c.spectrum;
  j["spectrum"] = {{"kind", S.kind},         {"form", S.form},
                   {"N", S.N},               {"m_min", S.m_min},
                   {"m_max", S.m_max},       {"richardson", S.richardson},
                   {"E_top", S.E_top},       {"min_ppw", S.min_ppw},
                   {"min_N", S.min_N},       {"residual_tol", S.residual_tol},
                   {"size_cap", S.size_cap}, {"M_theta", S.M_theta},
                   {"restrict_to_window", S.restrict_to_window}};
  const auto& W = c.window;
  j["window"] = {{"F0", W.F0 ? json(*W.F0) : json(nullptr)},
                 {"a0", W.a0},
                 {"C", W.C},
                 {"delta", W.delta},
                 {"E_center", W.E_center},
                 {"margin_factor", W.margin_factor},
                 {"grow", W.grow}};
  const auto& A = c.scan;
  j["scan"] = {{"a_min", A.a_min},   {"a_max_frac", A.a_max_frac}, {"n_a", A.n_a},
               {"T", A.T},           {"n_starts", A.n_starts},     {"q_max", A.q_max},
               {"alpha", A.alpha},   {"d", A.d},                   {"height_cap", A.height_cap},
               {"flow_qinf", A.flow_qinf}, {"kernel", A.kernel}};
  const auto& Wd = c.width;
  j["width"] = {{"enabled", Wd.enabled}, {"a_lo", Wd.a_lo}, {"a_hi", Wd.a_hi},         {"heights", Wd.heights},
                {"T", Wd.T},       {"n_starts", Wd.n_starts}, {"kernel", Wd.kernel}};
  const auto& Cs = c.count_scaling;
  j["count_scaling"] = {{"h", Cs.h},
                        {"F0", Cs.F0 ? json(*Cs.F0) : json(nullptr)},
                        {"a0", Cs.a0},
                        {"C", Cs.C},
                        {"E_center", Cs.E_center},
                        {"min_ppw", Cs.min_ppw},
                        {"size_cap", Cs.size_cap},
                        {"M_margin", Cs.M_margin},
                        {"synthetic", Cs.synthetic},
                        {"synthetic_gamma", Cs.synthetic_gamma},
                        {"synthetic_noise", Cs.synthetic_noise}};
  const auto& N = c.normalform;
  j["normalform"] = {{"xi1_lo", N.xi1_lo}, {"xi1_hi", N.xi1_hi},   {"n1", N.n1},
                     {"xi2_lo", N.xi2_lo}, {"xi2_hi", N.xi2_hi},   {"n2", N.n2},
                     {"K_max", N.K_max},   {"eps", N.eps},         {"N", N.N},
                     {"lie_order", N.lie_order}, {"floor", N.floor}, {"T", N.T},
                     {"bound_xi1", N.bound_xi1}, {"bound_n1", N.bound_n1}};
  const auto& Tp = c.toeplitz;
  j["toeplitz"] = {{"symbol", Tp.symbol},         {"R", Tp.R},
                   {"h", Tp.h},                   {"tail_tol", Tp.tail_tol},
                   {"legendre_n", Tp.legendre_n}, {"parseval_h", Tp.parseval_h},
                   {"parseval_quartic", Tp.parseval_quartic}, {"k_lo", Tp.k_lo},
                   {"k_hi", Tp.k_hi}};
  const auto& G = c.good_values;
  j["good_values"] = {{"F0_lo", G.F0_lo}, {"F0_hi", G.F0_hi}, {"n_F0", G.n_F0}, {"alpha", G.alpha},
                      {"beta", G.beta},   {"gamma", G.gamma}, {"d", G.d}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

/// Parses and validates; throws ConfigFieldError naming the offending key.
inline ExperimentConfig parse_config(const json& j) {
  using detail::Reader;
  ExperimentConfig c;
  Reader root(j, "");

  if (auto r = root.sub("surface")) {
    r->get("family", c.surface.family);
    r->get("params", c.surface.params);
    r->finish();
  }
  try {
    (void)build_surface(c.surface);
  } catch (const Error& e) {
    throw ConfigFieldError("surface", e.what());
  }

  if (auto r = root.sub("observable")) c.observable = detail::read_observable(*r);

  root.get("h", c.h);
  root.check(!c.h.empty(), "h", "needs at least one value");
  for (double h : c.h) root.check(h > 0.0 && h <= 0.5, "h", "values must lie in (0, 0.5]");

  if (auto r = root.sub("eps_rule")) {
    r->get("p", c.eps_rule.p);
    r->get("c", c.eps_rule.c);
    r->check(c.eps_rule.c >= 0.0, "c", "must be >= 0");
    r->finish();
  }

  if (auto r = root.sub("lattice")) {
    auto& L = c.lattice;
    r->get("E_lo", L.E_lo);
    r->get("E_hi", L.E_hi);
    r->get("q_max", L.q_max);
    r->get("alpha", L.alpha);
    r->get("d", L.d);
    r->check(L.E_lo > 0.0, "E_lo", "must be positive");
    r->check(L.E_hi >= L.E_lo, "E_hi", "must be >= E_lo");
    r->check(L.q_max >= 1, "q_max", "must be >= 1");
    r->finish();
  }

  if (auto r = root.sub("spectrum")) {
    auto& S = c.spectrum;
    r->get("kind", S.kind);
    r->get("form", S.form);
    r->get("N", S.N);
    r->get("m_min", S.m_min);
    r->get("m_max", S.m_max);
    r->get("richardson", S.richardson);
    r->get("E_top", S.E_top);
    r->get("min_ppw", S.min_ppw);
    r->get("min_N", S.min_N);
    r->get("residual_tol", S.residual_tol);
    r->get("size_cap", S.size_cap);
    r->get("M_theta", S.M_theta);
    r->get("restrict_to_window", S.restrict_to_window);
    r->check(S.kind == "rotational" || S.kind == "2d", "kind", "must be 'rotational' or '2d'");
    r->check(S.form == "weighted" || S.form == "liouville", "form", "must be 'weighted' or 'liouville'");
    r->check(S.N >= 2, "N", "must be >= 2");
    r->check(S.m_min >= 0, "m_min", "must be >= 0");
    r->check(S.m_max >= -1, "m_max", "must be >= -1");
    r->check(S.E_top > 0.0, "E_top", "must be positive");
    r->check(S.residual_tol > 0.0, "residual_tol", "must be positive");
    r->check(S.size_cap >= 1, "size_cap", "must be >= 1");
    r->check(S.M_theta >= 0, "M_theta", "must be >= 0");
    r->finish();
  }

  if (auto r = root.sub("window")) {
    auto& W = c.window;
    r->get("F0", W.F0);
    r->get("a0", W.a0);
    r->get("C", W.C);
    r->get("delta", W.delta);
    r->get("E_center", W.E_center);
    r->get("margin_factor", W.margin_factor);
    r->get("grow", W.grow);
    r->check(W.C > 1.0, "C", "must exceed 1");
    r->check(W.delta >= 0.0, "delta", "must be >= 0");
    r->check(W.margin_factor >= 0.0, "margin_factor", "must be >= 0");
    r->finish();
  }

  if (auto r = root.sub("scan")) {
    auto& A = c.scan;
    r->get("a_min", A.a_min);
    r->get("a_max_frac", A.a_max_frac);
    r->get("n_a", A.n_a);
    r->get("T", A.T);
    r->get("n_starts", A.n_starts);
    r->get("q_max", A.q_max);
    r->get("alpha", A.alpha);
    r->get("d", A.d);
    r->get("height_cap", A.height_cap);
    r->get("flow_qinf", A.flow_qinf);
    r->get("kernel", A.kernel);
    r->check(A.a_min > 0.0, "a_min", "must be positive");
    r->check(A.a_max_frac > 0.0 && A.a_max_frac < 1.0, "a_max_frac", "must lie in (0, 1)");
    r->check(A.n_a >= 2, "n_a", "must be >= 2");
    r->check(A.n_starts >= 8, "n_starts", "must be >= 8");
    r->check(A.kernel == "bump" || A.kernel == "box", "kernel", "must be 'bump' or 'box'");
    r->finish();
  }

  if (auto r = root.sub("width")) {
    auto& Wd = c.width;
    r->get("enabled", Wd.enabled);
    r->get("a_lo", Wd.a_lo);
    r->get("a_hi", Wd.a_hi);
    r->get("heights", Wd.heights);
    r->get("T", Wd.T);
    r->get("n_starts", Wd.n_starts);
    r->get("kernel", Wd.kernel);
    r->check(Wd.a_hi > Wd.a_lo && Wd.a_lo > 0.0, "a_hi", "need 0 < a_lo < a_hi");
    r->check(!Wd.heights.empty(), "heights", "needs at least one height");
    r->check(Wd.kernel == "bump" || Wd.kernel == "box", "kernel", "must be 'bump' or 'box'");
    r->finish();
  }

  if (auto r = root.sub("count_scaling")) {
    auto& Cs = c.count_scaling;
    r->get("h", Cs.h);
    r->get("F0", Cs.F0);
    r->get("a0", Cs.a0);
    r->get("C", Cs.C);
    r->get("E_center", Cs.E_center);
    r->get("min_ppw", Cs.min_ppw);
    r->get("size_cap", Cs.size_cap);
    r->get("M_margin", Cs.M_margin);
    r->get("synthetic", Cs.synthetic);
    r->get("synthetic_gamma", Cs.synthetic_gamma);
    r->get("synthetic_noise", Cs.synthetic_noise);
    r->check(Cs.h.size() >= 3, "h", "needs at least 3 values");
    r->check(Cs.C > 1.0, "C", "must exceed 1");
    r->check(Cs.synthetic_noise >= 0.0 && Cs.synthetic_noise < 1.0, "synthetic_noise", "must lie in [0, 1)");
    r->finish();
  }

  if (auto r = root.sub("normalform")) {
    auto& N = c.normalform;
    r->get("xi1_lo", N.xi1_lo);
    r->get("xi1_hi", N.xi1_hi);
    r->get("n1", N.n1);
    r->get("xi2_lo", N.xi2_lo);
    r->get("xi2_hi", N.xi2_hi);
    r->get("n2", N.n2);
    r->get("K_max", N.K_max);
    r->get("eps", N.eps);
    r->get("N", N.N);
    r->get("lie_order", N.lie_order);
    r->get("floor", N.floor);
    r->get("T", N.T);
    r->get("bound_xi1", N.bound_xi1);
    r->get("bound_n1", N.bound_n1);
    r->check(N.n1 >= 3 && N.n2 >= 3, "n1", "ξ-grids need at least 3 points per direction");
    r->check(N.K_max >= 1, "K_max", "must be >= 1");
    r->check(N.N >= 1, "N", "must be >= 1");
    r->check(N.lie_order >= N.N + 1, "lie_order", "must be >= N + 1");
    r->check(N.floor > 0.0, "floor", "must be positive");
    for (double T : N.T) r->check(T >= 1.0, "T", "values must be >= 1");
    r->finish();
  }

  if (auto r = root.sub("toeplitz")) {
    auto& Tp = c.toeplitz;
    r->get("symbol", Tp.symbol);
    r->get("R", Tp.R);
    r->get("h", Tp.h);
    r->get("tail_tol", Tp.tail_tol);
    r->get("legendre_n", Tp.legendre_n);
    r->get("parseval_h", Tp.parseval_h);
    r->get("parseval_quartic", Tp.parseval_quartic);
    r->get("k_lo", Tp.k_lo);
    r->get("k_hi", Tp.k_hi);
    r->check(Tp.symbol == "bump" || Tp.symbol == "bump-lobed" || Tp.symbol == "disc", "symbol",
             "must be 'bump', 'bump-lobed' or 'disc'");
    r->check(Tp.R > 0.0, "R", "must be positive");
    for (double h : Tp.h) r->check(h > 0.0, "h", "values must be positive");
    r->check(Tp.legendre_n >= 5, "legendre_n", "must be >= 5");
    r->check(Tp.k_hi >= Tp.k_lo, "k_hi", "must be >= k_lo");
    r->finish();
  }

  if (auto r = root.sub("good_values")) {
    auto& G = c.good_values;
    r->get("F0_lo", G.F0_lo);
    r->get("F0_hi", G.F0_hi);
    r->get("n_F0", G.n_F0);
    r->get("alpha", G.alpha);
    r->get("beta", G.beta);
    r->get("gamma", G.gamma);
    r->get("d", G.d);
    r->check(G.n_F0 >= 1, "n_F0", "must be >= 1");
    r->check(G.alpha > 0.0 && G.beta > 0.0 && G.gamma > 0.0 && G.d > 0.0, "alpha",
             "alpha, beta, gamma, d must be positive");
    r->finish();
  }

  if (auto r = root.sub("output")) {
    r->get("dir", c.output_dir);
    r->finish();
  }
  root.finish();

  try {
    (void)build_observable(c.observable);
  } catch (const ConfigFieldError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigFieldError("observable", e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigFieldError("<file>", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigFieldError("<file>", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

inline std::string config_hash(const ExperimentConfig& c) { return hash_string(to_json(c).dump()); }

}  // namespace revspec
