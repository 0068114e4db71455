#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cbflow {

/// One verification row: a named statistic compared against its bound.
struct CheckResult {
  std::string check;
  double statistic = 0.0;
  double threshold = 0.0;
  std::string cmp = "<";  // how statistic relates to threshold when passing
  bool pass = false;
  std::string seeds;  // seed ranges that produced the statistic
  std::string note;
};

struct VerifyConfig {
  std::uint64_t base_seed = 1000;
  int jobs = 1;
  int seeds_large = 10000;  // hitting law / scaling / tail bound
  int seeds_medium = 2000;  // CBESQ population checks, left passage
  int seeds_small = 100;    // exponential-martingale domination
  int seeds_tiny = 20;      // tangential limits, flow property
  std::string cli_path;     // binary to exercise for the determinism check
  std::string workdir = ".";

  std::string canonical() const;  // stable string for the config hash
};

int criterion_count();
std::string criterion_name(int index1);

/// Runs one verification criterion (1-based index) and returns its rows.
std::vector<CheckResult> run_criterion(int index1, const VerifyConfig& cfg);

/// Renders rows as the report JSON (array of check records).
std::string report_json(const std::vector<CheckResult>& rows,
                        const VerifyConfig& cfg);

}  // namespace cbflow
