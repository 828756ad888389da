#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "loadshape/types.hpp"

namespace loadshape {

double squared_distance(const HourlyProfile& a, const HourlyProfile& b);
double euclidean_distance(const HourlyProfile& a, const HourlyProfile& b);

struct LloydOptions {
  std::size_t max_iterations = 100;
  // Stop once |inertia_prev - inertia| <= relative_tolerance * inertia_prev.
  double relative_tolerance = 1e-6;
};

struct KMeansResult {
  // Each centroid is the arithmetic mean of the points labelled with it.
  std::vector<HourlyProfile> centroids;
  std::vector<std::size_t> labels;
  // Within-cluster sum of squared Euclidean distances.
  double inertia = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// k-means++ seeding. Returns fewer than k centers when the points have fewer
// than k distinct values.
std::vector<HourlyProfile> kmeans_plus_plus(std::span<const HourlyProfile> points, std::size_t k, std::uint64_t seed);

// Lloyd iterations from k-means++ seeds, then Hartigan single-point moves
// until none lowers the sum of squares. Assignment is data-parallel; the
// centroid update sums members in index order so the result does not depend
// on the thread count. Ties go to the lower centroid index.
KMeansResult kmeans(std::span<const HourlyProfile> points, std::size_t k, std::uint64_t seed,
                    const LloydOptions& options = {});

// Index of the nearest centroid (lowest index on ties) and its squared distance.
std::pair<std::size_t, double> nearest_centroid(const HourlyProfile& point, std::span<const HourlyProfile> centroids);

// Within-cluster sum of squares for a labelling, with centroids recomputed as means.
double within_cluster_ss(std::span<const HourlyProfile> points, std::span<const std::size_t> labels, std::size_t k);

}  // namespace loadshape
