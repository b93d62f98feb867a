#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "revspec/config.hpp"
#include "revspec/io.hpp"
#include "revspec/parallel.hpp"
#include "revspec/serialize.hpp"

using namespace revspec;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(json::parse(text));
  } catch (const ConfigFieldError& e) {
    return e.field();
  }
  return "<accepted>";
}

}  // namespace

TEST(Io, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hash_string("foobar"), "85944171f73967e8");
}

TEST(Io, DoublesRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) EXPECT_EQ(std::stod(format_double(x)), x);
  EXPECT_EQ(format_double(NAN), "nan");
  EXPECT_TRUE(num(INFINITY).is_null());
}

TEST(Io, CsvLayout) {
  CsvTable t{{"a", "b", "c", "d"}, {}};
  t.add({0.5, 3L, std::string("x,y"), true});
  EXPECT_THROW(t.add({1.0}), Error);
  Provenance p{"lattice", "c1", "s1", "q1", "2026-01-01T00:00:00Z", 1.5};
  const auto text = render_csv(t, p);
  EXPECT_EQ(text,
            "# revspec " REVSPEC_VERSION " lattice\n"
            "# config_hash=c1 surface_hash=s1 q_hash=q1\n"
            "# run started=2026-01-01T00:00:00Z wall_time_s=1.5\n"
            "a,b,c,d\n"
            "0.5,3,\"x,y\",1\n");
}

TEST(Config, DefaultsAndRoundTrip) {
  const auto c = parse_config(json::parse(R"({"h": [0.05]})"));
  EXPECT_EQ(c.surface.family, "deformed-sphere");
  EXPECT_DOUBLE_EQ(c.eps_rule(0.01), std::pow(0.01, 0.8));
  const auto again = parse_config(to_json(c));
  EXPECT_EQ(config_hash(c), config_hash(again));
  auto d = c;
  d.window.C = 3.0;
  EXPECT_NE(config_hash(c), config_hash(d));
}

TEST(Config, NestedObservables) {
  const auto c = parse_config(json::parse(
      R"({"observable": {"builtin": "cos-ks", "k": 2, "plus": [{"builtin": "exp-x", "kappa": 0.5, "degree": 4, "tilt": 0.5}]}})"));
  const auto q = build_observable(c.observable);
  const auto S = build_surface(c.surface);
  EXPECT_NEAR(q(S, 0.4, 0.0), std::cos(0.8) + observables::exp_x(0.5, 4, 0.5)(S, 0.4, 0.0), 1e-14);
  EXPECT_EQ(q.id(), observables::sum(observables::cos_ks(2), observables::exp_x(0.5, 4, 0.5)).id());
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of(R"({"window": {"C": 0.5}})"), "window.C");
  EXPECT_EQ(field_of(R"({"h": []})"), "h");
  EXPECT_EQ(field_of(R"({"h": ["x"]})"), "h");
  EXPECT_EQ(field_of(R"({"spectrum": {"kind": "3d"}})"), "spectrum.kind");
  EXPECT_EQ(field_of(R"({"scan": {"nn_a": 3}})"), "scan.nn_a");
  EXPECT_EQ(field_of(R"({"observable": {"builtin": "cos-ks", "plus": [{"builtin": "bogus"}]}})"),
            "observable.plus[0].builtin");
  EXPECT_EQ(field_of(R"({"surface": {"family": "torus", "params": []}})"), "surface");
  EXPECT_EQ(field_of(R"({"normalform": {"N": 3, "lie_order": 3}})"), "normalform.lie_order");
  EXPECT_EQ(field_of(R"({"count_scaling": {"h": [0.1, 0.05]}})"), "count_scaling.h");
}

TEST(Config, LoadFromFile) {
  const auto dir = std::filesystem::temp_directory_path() / "revspec_cfg_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "c.json";
  std::ofstream(path) << "{ not json";
  try {
    load_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
  EXPECT_THROW(load_config(dir / "missing.json"), Error);
}

TEST(Serialize, LatticeAndSpectrumRoundTrip) {
  Lattice L;
  L.surface_id = "deformed-sphere:0.2";
  L.q_id = "cos2s";
  L.h = 0.01;
  L.eps = 0.02;
  L.E_lo = 0.9;
  L.E_hi = 1.1;
  QuasiEigenvalue q;
  q.k1 = 4;
  q.k2 = -7;
  q.E = 1.01;
  q.F = -0.07;
  q.z = {1.01, 0.003};
  q.q_avg = NAN;
  L.entries.push_back(q);
  const auto j = to_json(L);
  EXPECT_TRUE(j["entries"][0]["q_avg"].is_null());
  const auto back = lattice_from_json(j);
  EXPECT_EQ(back.entries[0].k2, -7);
  EXPECT_EQ(back.entries[0].z, q.z);
  EXPECT_TRUE(std::isnan(back.entries[0].q_avg));

  SpectrumResult s;
  s.surface_id = "x";
  s.q_id = "y";
  s.eigen.push_back({cplx(1.0 / 3.0, -2e-5), -3, 1e-12, true});
  const auto sb = spectrum_from_json(json::parse(to_json(s).dump()));
  EXPECT_EQ(sb.eigen[0].value, s.eigen[0].value);
  EXPECT_EQ(sb.eigen[0].mode, -3);
  EXPECT_TRUE(sb.eigen[0].mirror);
}

TEST(Parallel, RunsEveryIndexAndRethrowsLowest) {
  std::vector<int> hit(50, 0);
  parallel_for(50, 4, [&](int i) { hit[i] += 1; });
  for (int v : hit) EXPECT_EQ(v, 1);
  try {
    parallel_for(10, 3, [](int i) {
      if (i == 7 || i == 4) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "4");
  }
}
