#pragma once

// Result files: CSV with '#' provenance lines and JSON with a provenance object.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "revspec/errors.hpp"

#ifndef REVSPEC_VERSION
#define REVSPEC_VERSION "0.1.0"
#endif

namespace revspec {

using json = nlohmann::json;

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string hash_string(std::string_view s) { return hex64(fnv1a(s)); }

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Provenance {
  std::string subcommand;
  std::string config_hash;
  std::string surface_hash;
  std::string q_hash;
  std::string started;  // UTC, ISO 8601
  double wall_time = 0.0;

  json to_json() const {
    return {{"tool", "revspec"},       {"version", REVSPEC_VERSION}, {"subcommand", subcommand},
            {"config_hash", config_hash}, {"surface_hash", surface_hash}, {"q_hash", q_hash},
            {"started", started},         {"wall_time_s", wall_time}};
  }
};

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

using Cell = std::variant<double, long, std::string, bool>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    require(row.size() == columns.size(), ErrorKind::DomainError, "CSV row width does not match the header");
    rows.push_back(std::move(row));
  }
};

inline std::string cell_text(const Cell& c) {
  struct V {
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(long x) const { return std::to_string(x); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
    std::string operator()(bool b) const { return b ? "1" : "0"; }
  };
  return std::visit(V{}, c);
}

// Header: three '#' lines, the last one holding the only run-dependent fields.
inline std::string render_csv(const CsvTable& t, const Provenance& p) {
  std::string out;
  out += "# revspec " + std::string(REVSPEC_VERSION) + " " + p.subcommand + "\n";
  out += "# config_hash=" + p.config_hash + " surface_hash=" + p.surface_hash + " q_hash=" + p.q_hash + "\n";
  out += "# run started=" + p.started + " wall_time_s=" + format_double(p.wall_time) + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + cell_text(r[i]);
    out += "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::ConfigError, "cannot open output file " + path.string());
  f << text;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t, const Provenance& p) {
  write_text(path, render_csv(t, p));
}

inline void write_json(const std::filesystem::path& path, const json& data, const Provenance& p) {
  json doc = {{"provenance", p.to_json()}, {"data", data}};
  write_text(path, doc.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::ConfigError, "cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
}

// NaN and infinities become null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace revspec
