// Acceptance run: one [PASS]/[FAIL] line per criterion. Criteria 1..12 come
// from verify-all at the small budget; 13 repeats the whole suite at 1, 4 and
// 16 workers plus a second single-worker run and compares report bytes.
//
//   acceptance [seed]    (default seed 1)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "randquad/harness/experiments.hpp"

namespace rh = randquad::harness;

namespace {

std::string bytes_of(const rh::ExperimentReport& r) {
  std::string out = r.serialize();
  for (const rh::Table& t : r.tables) out += t.to_csv();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
  int failures = 0;

  const rh::ExperimentReport base = rh::verify_all(rh::Budget::Small, seed, 1);
  const auto& info = rh::criteria();
  for (std::size_t i = 0; i + 1 < info.size(); ++i) {
    const rh::Claim& c = base.claims.at(i);
    const std::string detail = c.detail.substr(info[i].name.size() + 2);  // drop "name: "
    const double seconds = base.timings.at(i).seconds;
    const bool in_time = seconds <= info[i].limit_seconds;
    const bool pass = c.pass && in_time;
    failures += !pass;
    std::printf("[%s] criterion %d, %s (%.2f s, limit %.0f s%s): %s\n", pass ? "PASS" : "FAIL", info[i].id,
                info[i].name.c_str(), seconds, info[i].limit_seconds, in_time ? "" : ", OVER TIME",
                detail.c_str());
    std::fflush(stdout);
  }

  const std::string reference = bytes_of(base);
  bool identical = base.claims.back().pass;  // in-process spot check
  std::string detail = "spot check " + std::string(identical ? "ok" : "FAILED");
  double worst = 0.0;
  for (const unsigned threads : {4u, 16u, 1u}) {
    const auto start = std::chrono::steady_clock::now();
    const bool same = bytes_of(rh::verify_all(rh::Budget::Small, seed, threads)) == reference;
    worst = std::max(worst, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    identical = identical && same;
    detail += "; " + std::to_string(threads) + " threads " + (same ? "identical" : "DIFFERENT");
  }
  failures += !identical;
  std::printf("[%s] criterion 13, determinism across 1, 4, 16 threads and a repeat (%zu report bytes, slowest run "
              "%.1f s): %s\n",
              identical ? "PASS" : "FAIL", reference.size(), worst, detail.c_str());
  std::printf("%d criterion failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
