#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "randquad/equilibrium_measure.hpp"
#include "randquad/harness/config.hpp"

// What one run produces and how it lands on disk. Everything in report.json
// and tables/ is a pure function of the resolved config; wall-clock data goes
// to timing.json only.

namespace randquad::harness {

using Json = nlohmann::ordered_json;

enum ExitCode : int { kExitOk = 0, kExitClaimFailed = 1, kExitConfigError = 2, kExitIoError = 3 };

// A non-finite double becomes the string "inf", "-inf" or "nan".
Json number(double x);

struct Claim {
  std::string name;
  bool pass = false;
  std::string detail;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::string name;  // file stem under tables/
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
  // ',' delimiter, '.' decimals, %.17g, LF.
  std::string to_csv() const;
};

struct TimingEntry {
  std::string name;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::string command;
  Json config = Json::object();
  Json results = Json::object();
  std::vector<Claim> claims;
  std::vector<Table> tables;
  std::optional<JuliaRender> render;  // julia-render only
  std::vector<TimingEntry> timings;   // sidecar only

  void claim(std::string name, bool pass, std::string detail = {}) {
    claims.push_back({std::move(name), pass, std::move(detail)});
  }
  bool all_pass() const;
  std::vector<std::string> failures() const;

  Json to_json() const;
  // Canonical bytes of report.json: two-space indent, trailing LF.
  std::string serialize() const;
};

// <dir>/report.json, <dir>/tables/*.csv, <dir>/config.txt, <dir>/timing.json
// and, for renders, image.pgm, image.json and points.csv. IoError on failure.
void write_run_directory(const ExperimentReport& report, const ExperimentConfig& config, const std::string& dir,
                         double total_seconds);

}  // namespace randquad::harness
