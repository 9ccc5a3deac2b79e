#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "randquad/global_estimators.hpp"
#include "randquad/harness/config.hpp"
#include "randquad/harness/report.hpp"

namespace randquad::harness {

EstimatorOptions estimator_options(const ExperimentConfig& config);

// Runs the operation behind config.command(). Errors from invalid knobs
// surface as ConfigError or std::invalid_argument; claims never throw.
ExperimentReport run_experiment(const ExperimentConfig& config);

enum class Budget { Small, Full };
Budget parse_budget(const std::string& text);

struct CriterionInfo {
  int id = 0;
  std::string name;
  double limit_seconds = 0.0;  // wall-clock limit at the small budget
};

// Criteria 1..12 plus 13, an in-process thread-determinism spot check.
const std::vector<CriterionInfo>& criteria();

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  Json results = Json::object();
  double seconds = 0.0;
};

CriterionResult run_criterion(int id, Budget budget, std::uint64_t seed, unsigned threads);

// Every criterion in order; timings land in the report's sidecar list.
ExperimentReport verify_all(Budget budget, std::uint64_t seed, unsigned threads);

}  // namespace randquad::harness
