#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loadshape/clustering.hpp"
#include "loadshape/types.hpp"

namespace loadshape {

inline constexpr int kDictionarySchemaVersion = 1;

struct DictionaryShape {
  std::size_t id = 0;
  HourlyProfile values{};
  std::size_t member_count = 0;
  // Sum of member days' total kWh.
  double kwh = 0.0;

  friend bool operator==(const DictionaryShape&, const DictionaryShape&) = default;
};

// Shapes ordered by descending kWh coverage (ties: lower pre-order id), with
// ids equal to their position.
struct ClusterDictionary {
  std::vector<DictionaryShape> shapes;
  double truncation_v = 0.0;
  double theta = 0.0;
  std::map<std::string, std::string> provenance;

  std::size_t size() const { return shapes.size(); }
  std::vector<HourlyProfile> centers() const;
  friend bool operator==(const ClusterDictionary&, const ClusterDictionary&) = default;
};

struct TruncationStep {
  std::size_t clusters_before = 0;
  std::size_t removed_clusters = 0;
  std::size_t removed_members = 0;
  double violation_after = 0.0;
};

struct TruncationResult {
  ClusterDictionary dictionary;
  // Shape index -> dictionary id.
  std::vector<std::size_t> labels;
  std::vector<TruncationStep> steps;
  double violation_initial = 0.0;
  // Violation rate before the final iteration ran (the last value below V).
  double violation_before_exit = 0.0;
  double violation_final = 0.0;
};

// Iterative truncation. While the violation rate is below V and more than
// one cluster remains: drop the longest run of smallest clusters whose
// cumulative membership stays within floor(V * N) (at least one cluster),
// move their members to the nearest remaining centroid by Euclidean
// distance, recompute the violation rate. The state after the exiting
// iteration is kept even if it overshoots V. Centroid values are not
// recomputed; member counts and kWh are.
TruncationResult truncate(const ClusterModel& model, std::span<const ShapeVector> shapes, double v);

struct Assignment {
  std::size_t shape_id = 0;
  double distance = 0.0;
  double rse = 0.0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

// Nearest dictionary shape by Euclidean distance, ties to the lowest id.
// Result i belongs to shapes[i].
std::vector<Assignment> assign_all(std::span<const ShapeVector> shapes, const ClusterDictionary& dictionary);

// Canonical SHA-256 over everything persisted except the digest itself.
std::string dictionary_digest(const ClusterDictionary& dictionary);

// Throws IoError, FormatError, VersionMismatchError, DigestMismatchError or
// InvariantError (unit-sum centers, dense ids, kWh ordering).
void save_dictionary(const std::filesystem::path& path, const ClusterDictionary& dictionary);
ClusterDictionary load_dictionary(const std::filesystem::path& path);

// assignments.csv: household_id,date,cluster_id,distance,rse
void write_assignments(const std::filesystem::path& path, std::span<const ShapeVector> shapes,
                       std::span<const Assignment> assignments);

struct AssignmentRecord {
  DayKey key;
  Assignment assignment;
};
std::vector<AssignmentRecord> read_assignments(const std::filesystem::path& path);

}  // namespace loadshape
