#include "randquad/harness/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "randquad/error.hpp"

namespace randquad::harness {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace

Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + csv_field(columns[i]);
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const auto* d = std::get_if<double>(&row[i])) {
        out += format_double(*d);
      } else if (const auto* n = std::get_if<long long>(&row[i])) {
        out += std::to_string(*n);
      } else {
        out += csv_field(std::get<std::string>(row[i]));
      }
    }
    out += '\n';
  }
  return out;
}

bool ExperimentReport::all_pass() const {
  for (const Claim& c : claims) {
    if (!c.pass) return false;
  }
  return true;
}

std::vector<std::string> ExperimentReport::failures() const {
  std::vector<std::string> out;
  for (const Claim& c : claims) {
    if (!c.pass) out.push_back(c.name);
  }
  return out;
}

Json ExperimentReport::to_json() const {
  Json j;
  j["command"] = command;
  j["status"] = all_pass() ? "pass" : "fail";
  j["config"] = config;
  j["results"] = results;
  Json cl = Json::array();
  for (const Claim& c : claims) cl.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["claims"] = cl;
  j["failures"] = failures();
  Json tb = Json::array();
  for (const Table& t : tables) tb.push_back("tables/" + t.name + ".csv");
  j["tables"] = tb;
  return j;
}

std::string ExperimentReport::serialize() const { return to_json().dump(2) + "\n"; }

void write_run_directory(const ExperimentReport& report, const ExperimentConfig& config, const std::string& dir,
                         double total_seconds) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root / "tables", ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + (root / "tables").string() + "': " + ec.message());

  write_text(root / "report.json", report.serialize());
  write_text(root / "config.txt", config.serialize());
  for (const Table& t : report.tables) write_text(root / "tables" / (t.name + ".csv"), t.to_csv());

  if (report.render) {
    const JuliaRender& r = *report.render;
    write_pgm(r.raster, (root / "image.pgm").string());
    write_cloud_csv(r.cloud, (root / "points.csv").string());
    Json meta;
    meta["width"] = r.raster.width;
    meta["height"] = r.raster.height;
    meta["re_min"] = r.raster.bounds.re_min;
    meta["re_max"] = r.raster.bounds.re_max;
    meta["im_min"] = r.raster.bounds.im_min;
    meta["im_max"] = r.raster.bounds.im_max;
    meta["max_count"] = r.raster.max_count;
    meta["scale"] = "255 * ln(1 + count) / ln(1 + max_count)";
    meta["top_row"] = "im_max";
    write_text(root / "image.json", meta.dump(2) + "\n");
  }

  Json timing;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  timing["finished_utc"] = stamp;
  timing["seconds"] = total_seconds;
  timing["threads"] = config.raw("threads");
  Json parts = Json::object();
  for (const TimingEntry& t : report.timings) parts[t.name] = t.seconds;
  timing["parts"] = parts;
  write_text(root / "timing.json", timing.dump(2) + "\n");
}

}  // namespace randquad::harness
