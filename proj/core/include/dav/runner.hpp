#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "dav/config.hpp"

namespace dav {

inline constexpr const char* kToolVersion = "davlab 0.1.0";

/// Exit-code taxonomy (fixed for scriptability).
enum ExitCode {
  kExitOk = 0,
  kExitConfig = 2,
  kExitCertification = 3,
  kExitNumerical = 4,
  kExitIo = 5,
};

struct RunOverrides {
  std::optional<std::string> scenario;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

/// Execute the configured scenario pipeline (certification always first),
/// write CSV/JSON outputs plus the run manifest, and return an exit code.
/// Certification failure still writes certificate.json and the manifest
/// and returns kExitCertification. Numerical and IO failures propagate as
/// exceptions (NoConvergence and friends, IoError).
int run_scenario(const ExperimentConfig& config, const RunOverrides& overrides,
                 std::ostream& log);

struct CompareRow {
  std::string path;   // JSON pointer-ish path of the metric
  std::string a, b;   // stringified values
  double numeric_diff = 0.0;
  bool categorical = false;
};

struct CompareReport {
  bool identical = true;
  std::vector<CompareRow> rows;
};

/// Per-metric diff of two run manifests (and their summary files).
/// Throws SchemaMismatch when the runs are not comparable.
CompareReport compare_manifests(const std::filesystem::path& manifest_a,
                                const std::filesystem::path& manifest_b);

}  // namespace dav
