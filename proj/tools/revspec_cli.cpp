// revspec <subcommand> --config <path> [--out <dir>] [--threads <n>] [--seed <u64>]
// Exit status: 0 ok, 1 numerical failure, 2 config or input error.

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "revspec/pipeline.hpp"

namespace {

using namespace revspec;

int exit_code(ErrorKind k) {
  return k == ErrorKind::ConfigError || k == ErrorKind::HashMismatch ? 2 : 1;
}

// Machine-readable error record: one JSON line on stderr, and error.json in the
// output directory when it can be written.
void report(const std::string& sub, const std::string& kind, const std::string& field, const std::string& msg,
            const std::filesystem::path& out) {
  json rec = {{"subcommand", sub}, {"error", kind}, {"message", msg}};
  if (!field.empty()) rec["field"] = field;
  std::cerr << rec.dump() << "\n";
  if (out.empty()) return;
  try {
    write_text(out / "error.json", rec.dump(2) + "\n");
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra of damped wave operators on surfaces of revolution"};
  app.require_subcommand(1);
  std::string config_path, out_dir, spectrum_in, lattice_in;
  int threads = 1;
  std::uint64_t seed = 0;

  using Runner = std::function<RunOutcome(const RunContext&)>;
  const std::map<std::string, std::pair<Runner, std::string>> commands = {
      {"scan-classical", {run_scan_classical, "rotation numbers, torus averages and Q_inf over the edge"}},
      {"lattice", {run_lattice, "EBK quasi-eigenvalue lattice"}},
      {"spectrum", {run_spectrum, "discretized spectrum (rotational or 2d)"}},
      {"match", {run_match, "pair spectrum and lattice inside the window"}},
      {"count-scaling", {run_count_scaling, "rectangle counts over an (h, eps) grid and their exponent"}},
      {"normalform", {run_normalform, "secular reduction and G_T checks on the test symbols"}},
      {"toeplitz-bench", {run_toeplitz_bench, "Toeplitz trace bound, Legendre and Parseval checks"}},
      {"good-values", {run_good_values, "good-value verdicts over an F0 grid"}},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, cmd] : commands) {
    auto* s = app.add_subcommand(name, cmd.second);
    s->add_option("--config", config_path, "experiment config (JSON)")->required();
    s->add_option("--out", out_dir, "output directory (overrides output.dir)");
    s->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
    s->add_option("--seed", seed, "seed for the synthetic/noise paths");
    if (name == "match") {
      s->add_option("--spectrum", spectrum_in, "spectrum.json from a previous run");
      s->add_option("--lattice", lattice_in, "lattice.json from a previous run");
    }
    subs[name] = s;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("", "ConfigError", "", e.what(), {});
    return 2;
  }

  std::string sub;
  for (const auto& [name, s] : subs)
    if (s->parsed()) sub = name;

  RunContext ctx;
  try {
    ctx.cfg = load_config(config_path);
  } catch (const ConfigFieldError& e) {
    report(sub, "ConfigError", e.field(), e.what(), std::filesystem::path(out_dir));
    return 2;
  } catch (const Error& e) {
    report(sub, std::string(to_string(e.kind())), "", e.what(), {});
    return 2;
  }
  ctx.out = out_dir.empty() ? std::filesystem::path(ctx.cfg.output_dir) : std::filesystem::path(out_dir);
  ctx.threads = threads;
  ctx.seed = seed;
  if (!spectrum_in.empty()) ctx.spectrum_in = spectrum_in;
  if (!lattice_in.empty()) ctx.lattice_in = lattice_in;

  try {
    const auto res = commands.at(sub).first(ctx);
    json line = {{"subcommand", sub}, {"summary", res.summary}};
    json files = json::array();
    for (const auto& f : res.files) files.push_back(f.string());
    line["files"] = files;
    std::cout << line.dump() << "\n";
    return 0;
  } catch (const ConfigFieldError& e) {
    report(sub, "ConfigError", e.field(), e.what(), ctx.out);
    return 2;
  } catch (const Error& e) {
    report(sub, std::string(to_string(e.kind())), "", e.what(), ctx.out);
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    report(sub, "InternalError", "", e.what(), ctx.out);
    return 1;
  }
}
