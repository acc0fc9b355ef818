#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace airybeta {

// Sizes default to the acceptance scale. Every criterion draws from its own
// seed family derived from `seed`, so criteria can run in any order or alone.
struct VerifyConfig {
  std::uint64_t seed = 20261018;
  int workers = 1;
  double dt = 1e-3;

  int ephi_M = 100000;
  long clt_N = 100000;
  int clt_M = 10000;
  int counting_M = 100;
  long tw_N = 2000;
  int tw_M = 10000;
  int envelope_M = 1000;
  std::vector<long> coupled_N{100000, 400000, 800000};
  int coupled_seeds = 1000;
  long planar_N = 10000;
  int planar_M = 1000;
  int shift_M = 10000;

  std::vector<int> criteria;  // empty runs 1..12
};

struct Metric {
  std::string name;
  double value = 0.0;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  std::vector<Metric> metrics;
};

inline constexpr int kLibraryCriteria = 12;

std::string criterion_title(int id);
CriterionResult run_criterion(int id, const VerifyConfig& config);
// Runs the selected criteria in increasing order; `on_result` sees each one as
// soon as it is done.
std::vector<CriterionResult> run_acceptance(
    const VerifyConfig& config,
    const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace airybeta
