#include "loadshape/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "loadshape/error.hpp"
#include "loadshape/parallel.hpp"
#include "loadshape/random.hpp"

namespace loadshape {

double squared_distance(const HourlyProfile& a, const HourlyProfile& b) {
  double s = 0.0;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    const double d = a[t] - b[t];
    s += d * d;
  }
  return s;
}

double euclidean_distance(const HourlyProfile& a, const HourlyProfile& b) { return std::sqrt(squared_distance(a, b)); }

std::pair<std::size_t, double> nearest_centroid(const HourlyProfile& point, std::span<const HourlyProfile> centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(point, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return {best, best_d};
}

std::vector<HourlyProfile> kmeans_plus_plus(std::span<const HourlyProfile> points, std::size_t k, std::uint64_t seed) {
  std::vector<HourlyProfile> centers;
  if (points.empty() || k == 0) return centers;
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centers.push_back(points[first(rng)]);

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], centers[0]);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (centers.size() < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) break;
    const double target = unit(rng) * total;
    double acc = 0.0;
    std::size_t pick = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      acc += d2[i];
      if (d2[i] > 0.0 && acc > target) {
        pick = i;
        break;
      }
    }
    if (pick == points.size()) {
      // Rounding pushed target past the running sum; take the last candidate.
      for (std::size_t i = points.size(); i-- > 0;) {
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centers.back()));
    }
  }
  return centers;
}

namespace {

// Assigns every point; returns whether any label changed.
bool assign_points(std::span<const HourlyProfile> points, std::span<const HourlyProfile> centroids,
                   std::vector<std::size_t>& labels, std::vector<double>& dist) {
  std::vector<char> changed(points.size(), 0);
  parallel::for_chunks(points.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [c, d] = nearest_centroid(points[i], centroids);
      changed[i] = labels[i] != c;
      labels[i] = c;
      dist[i] = d;
    }
  });
  for (char c : changed) {
    if (c) return true;
  }
  return false;
}

void update_centroids(std::span<const HourlyProfile> points, const std::vector<std::size_t>& labels,
                      std::vector<HourlyProfile>& centroids, std::vector<std::size_t>& counts) {
  const std::size_t k = centroids.size();
  std::vector<HourlyProfile> sums(k, HourlyProfile{});
  counts.assign(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& s = sums[labels[i]];
    for (std::size_t t = 0; t < kHoursPerDay; ++t) s[t] += points[i][t];
    ++counts[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    for (std::size_t t = 0; t < kHoursPerDay; ++t) centroids[c][t] = sums[c][t] / static_cast<double>(counts[c]);
  }
}

// Hartigan passes: move single points to another cluster whenever that lowers
// the total sum of squares, updating both means in place. Every fixed point
// of this is also a Lloyd fixed point, so it only ever improves on Lloyd.
void hartigan_refine(std::span<const HourlyProfile> points, std::vector<std::size_t>& labels,
                     std::vector<HourlyProfile>& centroids, std::size_t max_passes) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> counts;
  update_centroids(points, labels, centroids, counts);
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t a = labels[i];
      if (counts[a] < 2) continue;
      const double na = static_cast<double>(counts[a]);
      const double removal = na / (na - 1.0) * squared_distance(points[i], centroids[a]);
      std::size_t target = a;
      double best = removal;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a || counts[b] == 0) continue;
        const double nb = static_cast<double>(counts[b]);
        const double addition = nb / (nb + 1.0) * squared_distance(points[i], centroids[b]);
        // The margin keeps rounding noise from bouncing a point back and forth.
        if (addition < best * (1.0 - 1e-12)) {
          best = addition;
          target = b;
        }
      }
      if (target == a) continue;
      const double nb = static_cast<double>(counts[target]);
      for (std::size_t t = 0; t < kHoursPerDay; ++t) {
        centroids[a][t] = (na * centroids[a][t] - points[i][t]) / (na - 1.0);
        centroids[target][t] = (nb * centroids[target][t] + points[i][t]) / (nb + 1.0);
      }
      --counts[a];
      ++counts[target];
      labels[i] = target;
      moved = true;
    }
    if (!moved) break;
  }
}

}  // namespace

double within_cluster_ss(std::span<const HourlyProfile> points, std::span<const std::size_t> labels, std::size_t k) {
  std::vector<HourlyProfile> centroids(k, HourlyProfile{});
  std::vector<std::size_t> counts;
  update_centroids(points, std::vector<std::size_t>(labels.begin(), labels.end()), centroids, counts);
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += squared_distance(points[i], centroids[labels[i]]);
  return total;
}

KMeansResult kmeans(std::span<const HourlyProfile> points, std::size_t k, std::uint64_t seed,
                    const LloydOptions& options) {
  if (points.empty()) throw EmptyInputError("k-means on an empty point set");
  if (k == 0) throw InvalidArgument("k-means needs k >= 1");

  KMeansResult result;
  result.centroids = kmeans_plus_plus(points, k, seed);
  const std::size_t kk = result.centroids.size();
  result.labels.assign(points.size(), kk);
  std::vector<double> dist(points.size(), 0.0);
  std::vector<std::size_t> counts;

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const bool changed = assign_points(points, result.centroids, result.labels, dist);
    if (!changed) {
      result.converged = true;
      break;
    }
    update_centroids(points, result.labels, result.centroids, counts);

    // An emptied cluster restarts at the point farthest from its centroid.
    for (std::size_t c = 0; c < kk; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < points.size(); ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      result.centroids[c] = points[far];
      dist[far] = 0.0;
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      inertia += squared_distance(points[i], result.centroids[result.labels[i]]);
    }
    const bool any_empty = std::find(counts.begin(), counts.end(), 0) != counts.end();
    if (!any_empty && std::isfinite(previous) &&
        std::abs(previous - inertia) <= options.relative_tolerance * previous) {
      result.converged = true;
      break;
    }
    previous = inertia;
  }

  hartigan_refine(points, result.labels, result.centroids, options.max_iterations);

  // Labels may still point at a reseeded centroid with no members; the
  // caller-visible invariant is centroid = mean of its members, so re-derive.
  update_centroids(points, result.labels, result.centroids, counts);
  std::vector<std::size_t> remap(kk, kk);
  std::vector<HourlyProfile> kept;
  for (std::size_t c = 0; c < kk; ++c) {
    if (counts[c] == 0) continue;
    remap[c] = kept.size();
    kept.push_back(result.centroids[c]);
  }
  result.centroids = std::move(kept);
  for (auto& l : result.labels) l = remap[l];
  result.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.inertia += squared_distance(points[i], result.centroids[result.labels[i]]);
  }
  return result;
}

}  // namespace loadshape
