#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "loadshape/kmeans.hpp"
#include "loadshape/types.hpp"

namespace loadshape {

struct Centroid {
  HourlyProfile values{};
  std::size_t member_count = 0;
};

// Relative squared error of a shape against a cluster center:
//   sum_t (s(t) - C(t))^2 / sum_t C(t)^2
// Not symmetric in its arguments. Throws DegenerateCenterError for an
// all-zero center.
double rse(const HourlyProfile& shape, const HourlyProfile& center);

// A shape violates the threshold when rse > theta (strictly).
inline bool violates(double rse_value, double theta) { return rse_value > theta; }

struct ClusterPhaseInfo {
  std::size_t k_init = 0;
  std::size_t k1 = 0;
  std::size_t split_rounds = 0;
  std::size_t splits = 0;
  bool split_cap_reached = false;
  std::size_t residual_violations = 0;

  bool merged = false;
  double merge_max_violation = 0.0;
  std::size_t merges = 0;
  std::size_t k2 = 0;
  // Violation rate after each accepted merge, in order.
  std::vector<double> merge_path;
  bool merge_monotone = true;
};

struct ClusterModel {
  std::vector<Centroid> centroids;
  // Shape index -> centroid index.
  std::vector<std::size_t> labels;
  double theta = 0.0;
  double violation_rate = 0.0;
  std::uint64_t seed = 0;
  ClusterPhaseInfo info;
  std::vector<std::string> warnings;
};

// Fraction of shapes whose RSE against their labelled centroid exceeds theta,
// computed from the labels every time.
double violation_rate(const ClusterModel& model, std::span<const ShapeVector> shapes);
double violation_rate(std::span<const HourlyProfile> centers, std::span<const std::size_t> labels,
                      std::span<const ShapeVector> shapes, double theta);

struct AdaptiveOptions {
  std::size_t k_init = 10;
  std::size_t max_split_rounds = 200;
  LloydOptions lloyd{};
};

// Threshold-driven adaptive k-means. An initial Lloyd run with k_init
// clusters is refined by splitting every cluster holding a violating shape
// with 2-means on its members, round after round, until nothing violates or
// the round cap is hit (then a warning records the residual violations).
//
// Each split is seeded from the cluster's position in the split tree, not
// from theta or the round, so the clusters for a larger theta are always a
// coarser cut of the same tree. That makes K1 non-increasing in theta.
ClusterModel adaptive_kmeans(std::span<const ShapeVector> shapes, double theta, std::uint64_t seed,
                             const AdaptiveOptions& options = {});

// Greedy agglomeration: repeatedly merge the two closest centroids
// (Euclidean; ties to the lowest id pair) into their member-weighted mean,
// relabelling members. Stops before the merge that would bring the violation
// rate to max_violation or above. Surviving clusters keep their relative
// order and are renumbered densely.
ClusterModel hierarchical_merge(const ClusterModel& model, std::span<const ShapeVector> shapes, double max_violation);

// model.json plus labels.csv (household_id,date,cluster_id). Shapes supply the keys.
void save_model(const std::filesystem::path& model_json, const std::filesystem::path& labels_csv,
                const ClusterModel& model, std::span<const ShapeVector> shapes);

struct LoadedModel {
  ClusterModel model;
  // Key of each labelled shape, in label order.
  std::vector<DayKey> keys;
};
LoadedModel load_model(const std::filesystem::path& model_json, const std::filesystem::path& labels_csv);

}  // namespace loadshape
