#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loadshape/error.hpp"
#include "loadshape/ingest.hpp"

namespace loadshape {

struct RunConfig {
  std::filesystem::path meter;
  std::filesystem::path weather;
  std::filesystem::path survey;
  std::filesystem::path out = "out";
  MeterSchema meter_schema = MeterSchema::kWide;
  double theta = 0.3;
  double merge_max_violation = 0.05;
  double truncate_v = 0.30;
  std::size_t subsample_n = 100000;
  // Required by cluster and analyze (bootstrap).
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  // "empirical" or "fixed:a,b,c".
  std::string quartiles = "empirical";
  // "total" or "discretionary".
  std::string coverage_weight = "total";
  std::size_t bootstrap_resamples = 10000;
  std::vector<std::size_t> occurrence_targets{0, 1, 2};
};

// Keys match the long CLI flags without dashes (theta, merge-violation,
// truncate-violation, sample, ...). Unknown keys throw InvalidArgument.
void apply_key_values(RunConfig& config, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> to_key_values(const RunConfig& config);

// Throws InvalidArgument: theta <= 0, fractions outside (0, 1), bad quartile
// or coverage mode.
void validate(const RunConfig& config);

enum class Stage { kIngest, kCluster, kTruncate, kAssign, kAnalyze };
std::string_view stage_name(Stage stage);
const std::vector<Stage>& all_stages();

// A stage failed; what() starts with the stage name.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& message)
      : Error("stage " + std::string(stage_name(stage)) + " failed: " + message), stage_(stage) {}
  Stage stage() const { return stage_; }

 private:
  Stage stage_;
};

struct StageOutcome {
  Stage stage{};
  bool cached = false;
  std::vector<std::string> messages;
};

// Runs one stage under the manifest contract: skipped ("cached") when the
// manifest holds the same parameter hash and input digests and the outputs
// are intact; otherwise recomputed. On failure the stage's outputs and
// manifest entry are removed and StageError is thrown. A missing upstream
// artifact names the stage that produces it.
StageOutcome run_stage(Stage stage, const RunConfig& config);
// All stages in order; stops at the first failure.
std::vector<StageOutcome> run_pipeline(const RunConfig& config);

// Deterministic id of the effective configuration.
std::string run_id(const RunConfig& config);

inline constexpr const char* kManifestFile = "run_manifest.json";

}  // namespace loadshape
