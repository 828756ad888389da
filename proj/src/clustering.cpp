#include "loadshape/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "loadshape/csv.hpp"
#include "loadshape/error.hpp"
#include "loadshape/parallel.hpp"
#include "loadshape/random.hpp"

namespace loadshape {

double rse(const HourlyProfile& shape, const HourlyProfile& center) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    const double d = shape[t] - center[t];
    num += d * d;
    den += center[t] * center[t];
  }
  if (!(den > 0.0)) throw DegenerateCenterError("RSE against a center with zero norm");
  return num / den;
}

double violation_rate(std::span<const HourlyProfile> centers, std::span<const std::size_t> labels,
                      std::span<const ShapeVector> shapes, double theta) {
  if (shapes.empty()) return 0.0;
  std::vector<char> flag(shapes.size(), 0);
  parallel::for_chunks(shapes.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) flag[i] = violates(rse(shapes[i].values, centers[labels[i]]), theta);
  });
  std::size_t count = 0;
  for (char f : flag) count += f;
  return static_cast<double>(count) / static_cast<double>(shapes.size());
}

double violation_rate(const ClusterModel& model, std::span<const ShapeVector> shapes) {
  std::vector<HourlyProfile> centers;
  centers.reserve(model.centroids.size());
  for (const auto& c : model.centroids) centers.push_back(c.values);
  return violation_rate(centers, model.labels, shapes, model.theta);
}

namespace {

struct SplitNode {
  HourlyProfile center{};
  std::vector<std::size_t> members;
  std::uint64_t seed = 0;
  bool checked = false;
  bool violating = false;
  bool unsplittable = false;
};

bool any_violation(const SplitNode& node, std::span<const ShapeVector> shapes, double theta) {
  for (auto i : node.members) {
    if (violates(rse(shapes[i].values, node.center), theta)) return true;
  }
  return false;
}

std::size_t count_violations(const HourlyProfile& center, const std::vector<std::size_t>& members,
                             std::span<const ShapeVector> shapes, double theta) {
  std::size_t n = 0;
  for (auto i : members) n += violates(rse(shapes[i].values, center), theta);
  return n;
}

}  // namespace

ClusterModel adaptive_kmeans(std::span<const ShapeVector> shapes, double theta, std::uint64_t seed,
                             const AdaptiveOptions& options) {
  if (shapes.empty()) throw EmptyInputError("adaptive k-means on an empty shape set");
  if (!(theta > 0.0)) throw InvalidArgument("theta must be positive");
  if (options.k_init == 0) throw InvalidArgument("k_init must be at least 1");

  std::vector<HourlyProfile> points;
  points.reserve(shapes.size());
  for (const auto& s : shapes) points.push_back(s.values);

  const auto initial = kmeans(points, std::min(options.k_init, points.size()), mix_seed(seed, 0), options.lloyd);

  std::vector<SplitNode> nodes(initial.centroids.size());
  for (std::size_t c = 0; c < nodes.size(); ++c) {
    nodes[c].center = initial.centroids[c];
    nodes[c].seed = mix_seed(seed, 1000 + c);
  }
  for (std::size_t i = 0; i < points.size(); ++i) nodes[initial.labels[i]].members.push_back(i);

  ClusterModel model;
  model.theta = theta;
  model.seed = seed;
  model.info.k_init = options.k_init;

  std::vector<HourlyProfile> member_points;
  while (true) {
    std::vector<std::size_t> pending;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (!nodes[n].checked) pending.push_back(n);
    }
    parallel::for_chunks(pending.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        auto& node = nodes[pending[p]];
        node.violating = any_violation(node, shapes, theta);
        node.checked = true;
      }
    });

    std::vector<std::size_t> to_split;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      if (nodes[n].violating && !nodes[n].unsplittable) to_split.push_back(n);
    }
    if (to_split.empty()) break;
    if (model.info.split_rounds == options.max_split_rounds) {
      model.info.split_cap_reached = true;
      break;
    }
    ++model.info.split_rounds;

    for (auto n : to_split) {
      member_points.clear();
      for (auto i : nodes[n].members) member_points.push_back(points[i]);
      const auto halves = kmeans(member_points, 2, nodes[n].seed, options.lloyd);
      if (halves.centroids.size() < 2) {
        nodes[n].unsplittable = true;
        continue;
      }
      SplitNode left, right;
      left.center = halves.centroids[0];
      right.center = halves.centroids[1];
      left.seed = mix_seed(nodes[n].seed, 1);
      right.seed = mix_seed(nodes[n].seed, 2);
      for (std::size_t m = 0; m < nodes[n].members.size(); ++m) {
        (halves.labels[m] == 0 ? left : right).members.push_back(nodes[n].members[m]);
      }
      nodes[n] = std::move(left);
      nodes.push_back(std::move(right));
      ++model.info.splits;
    }
  }

  model.centroids.reserve(nodes.size());
  model.labels.assign(shapes.size(), 0);
  for (std::size_t c = 0; c < nodes.size(); ++c) {
    model.centroids.push_back({nodes[c].center, nodes[c].members.size()});
    for (auto i : nodes[c].members) model.labels[i] = c;
  }
  model.info.k1 = model.centroids.size();
  model.violation_rate = violation_rate(model, shapes);
  model.info.residual_violations =
      static_cast<std::size_t>(model.violation_rate * static_cast<double>(shapes.size()) + 0.5);
  if (model.info.residual_violations > 0) {
    model.warnings.push_back("adaptive k-means stopped with " + std::to_string(model.info.residual_violations) +
                             " shapes above theta" +
                             (model.info.split_cap_reached ? " (split round cap reached)" : " (unsplittable clusters)"));
  }
  return model;
}

ClusterModel hierarchical_merge(const ClusterModel& model, std::span<const ShapeVector> shapes, double max_violation) {
  if (model.labels.size() != shapes.size()) throw InvalidArgument("model labels do not match the shape count");
  ClusterModel out = model;
  out.info.merged = true;
  out.info.merge_max_violation = max_violation;
  out.info.merges = 0;
  out.info.merge_path.clear();
  out.info.merge_monotone = true;
  out.violation_rate = violation_rate(model, shapes);
  out.info.k2 = model.centroids.size();

  const std::size_t k = model.centroids.size();
  const double n_shapes = static_cast<double>(shapes.size());
  if (k < 2 || out.violation_rate >= max_violation) return out;

  std::vector<HourlyProfile> center(k);
  std::vector<std::vector<std::size_t>> members(k);
  std::vector<std::size_t> violators(k, 0);
  for (std::size_t c = 0; c < k; ++c) center[c] = model.centroids[c].values;
  for (std::size_t i = 0; i < shapes.size(); ++i) members[model.labels[i]].push_back(i);
  std::size_t total_violators = 0;
  for (std::size_t c = 0; c < k; ++c) {
    violators[c] = count_violations(center[c], members[c], shapes, model.theta);
    total_violators += violators[c];
  }

  std::vector<std::size_t> active(k);
  for (std::size_t c = 0; c < k; ++c) active[c] = c;
  auto dist = [&](std::size_t a, std::size_t b) {
    return a < b ? squared_distance(center[a], center[b]) : squared_distance(center[b], center[a]);
  };

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> nn(k, kNone);
  std::vector<double> nn_d(k, std::numeric_limits<double>::infinity());
  auto refresh = [&](std::size_t a) {
    nn[a] = kNone;
    nn_d[a] = std::numeric_limits<double>::infinity();
    for (auto b : active) {
      if (b == a) continue;
      const double d = dist(a, b);
      if (d < nn_d[a]) {
        nn_d[a] = d;
        nn[a] = b;
      }
    }
  };
  parallel::for_chunks(active.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) refresh(active[p]);
  });

  double last_rate = out.violation_rate;
  while (active.size() > 1) {
    // Closest pair, ties to the lexicographically lowest (lo, hi) id pair.
    std::size_t lo = kNone, hi = kNone;
    double best = std::numeric_limits<double>::infinity();
    for (auto a : active) {
      const auto b = nn[a];
      const auto p = std::min(a, b), q = std::max(a, b);
      if (nn_d[a] < best || (nn_d[a] == best && (p < lo || (p == lo && q < hi)))) {
        best = nn_d[a];
        lo = p;
        hi = q;
      }
    }

    const double wl = static_cast<double>(members[lo].size());
    const double wh = static_cast<double>(members[hi].size());
    HourlyProfile merged{};
    for (std::size_t t = 0; t < kHoursPerDay; ++t) merged[t] = (wl * center[lo][t] + wh * center[hi][t]) / (wl + wh);
    std::vector<std::size_t> merged_members;
    merged_members.reserve(members[lo].size() + members[hi].size());
    std::merge(members[lo].begin(), members[lo].end(), members[hi].begin(), members[hi].end(),
               std::back_inserter(merged_members));
    const std::size_t merged_violators = count_violations(merged, merged_members, shapes, model.theta);
    const std::size_t next_total = total_violators - violators[lo] - violators[hi] + merged_violators;
    const double next_rate = static_cast<double>(next_total) / n_shapes;
    if (next_rate >= max_violation) break;

    center[lo] = merged;
    members[lo] = std::move(merged_members);
    members[hi].clear();
    violators[lo] = merged_violators;
    violators[hi] = 0;
    total_violators = next_total;
    active.erase(std::find(active.begin(), active.end(), hi));
    ++out.info.merges;
    out.info.merge_path.push_back(next_rate);
    if (next_rate < last_rate) out.info.merge_monotone = false;
    last_rate = next_rate;

    refresh(lo);
    for (auto a : active) {
      if (a == lo) continue;
      if (nn[a] == lo || nn[a] == hi) {
        refresh(a);
      } else {
        const double d = dist(a, lo);
        if (d < nn_d[a] || (d == nn_d[a] && lo < nn[a])) {
          nn_d[a] = d;
          nn[a] = lo;
        }
      }
    }
  }

  out.centroids.clear();
  std::vector<std::size_t> remap(k, kNone);
  for (auto c : active) {
    remap[c] = out.centroids.size();
    out.centroids.push_back({center[c], members[c].size()});
  }
  for (auto c : active) {
    for (auto i : members[c]) out.labels[i] = remap[c];
  }
  out.info.k2 = out.centroids.size();
  out.violation_rate = violation_rate(out, shapes);
  if (!out.info.merge_monotone) {
    out.warnings.push_back("violation rate decreased along the merge path");
  }
  return out;
}

namespace {

constexpr int kModelSchemaVersion = 1;

}  // namespace

void save_model(const std::filesystem::path& model_json, const std::filesystem::path& labels_csv,
                const ClusterModel& model, std::span<const ShapeVector> shapes) {
  if (model.labels.size() != shapes.size()) throw InvalidArgument("model labels do not match the shape count");
  nlohmann::json doc;
  doc["schema"] = "loadshape.model";
  doc["schema_version"] = kModelSchemaVersion;
  doc["theta"] = model.theta;
  doc["seed"] = model.seed;
  doc["violation_rate"] = model.violation_rate;
  doc["shape_count"] = shapes.size();
  const auto& info = model.info;
  doc["phase"] = {
      {"k_init", info.k_init},
      {"k1", info.k1},
      {"split_rounds", info.split_rounds},
      {"splits", info.splits},
      {"split_cap_reached", info.split_cap_reached},
      {"residual_violations", info.residual_violations},
      {"merged", info.merged},
      {"merge_max_violation", info.merge_max_violation},
      {"merges", info.merges},
      {"k2", info.k2},
      {"merge_path", info.merge_path},
      {"merge_monotone", info.merge_monotone},
  };
  doc["warnings"] = model.warnings;
  auto& centroids = doc["centroids"] = nlohmann::json::array();
  for (std::size_t c = 0; c < model.centroids.size(); ++c) {
    centroids.push_back({{"id", c},
                         {"member_count", model.centroids[c].member_count},
                         {"values", model.centroids[c].values}});
  }
  csv::write_file(model_json, doc.dump(1) + "\n");

  std::string labels = "household_id,date,cluster_id\n";
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    csv::append_row(labels, {shapes[i].source.household_id, shapes[i].source.date.iso(),
                             std::to_string(model.labels[i])});
  }
  csv::write_file(labels_csv, labels);
}

LoadedModel load_model(const std::filesystem::path& model_json, const std::filesystem::path& labels_csv) {
  std::ifstream in(model_json);
  if (!in) throw IoError("cannot open '" + model_json.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(model_json.string() + ": " + e.what());
  }
  LoadedModel loaded;
  auto& model = loaded.model;
  try {
    if (doc.at("schema").get<std::string>() != "loadshape.model") throw FormatError("not a model file");
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) throw VersionMismatchError(version, kModelSchemaVersion);
    model.theta = doc.at("theta").get<double>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.violation_rate = doc.at("violation_rate").get<double>();
    const auto& phase = doc.at("phase");
    model.info.k_init = phase.at("k_init").get<std::size_t>();
    model.info.k1 = phase.at("k1").get<std::size_t>();
    model.info.split_rounds = phase.at("split_rounds").get<std::size_t>();
    model.info.splits = phase.at("splits").get<std::size_t>();
    model.info.split_cap_reached = phase.at("split_cap_reached").get<bool>();
    model.info.residual_violations = phase.at("residual_violations").get<std::size_t>();
    model.info.merged = phase.at("merged").get<bool>();
    model.info.merge_max_violation = phase.at("merge_max_violation").get<double>();
    model.info.merges = phase.at("merges").get<std::size_t>();
    model.info.k2 = phase.at("k2").get<std::size_t>();
    model.info.merge_path = phase.at("merge_path").get<std::vector<double>>();
    model.info.merge_monotone = phase.at("merge_monotone").get<bool>();
    model.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& c : doc.at("centroids")) {
      Centroid centroid;
      centroid.member_count = c.at("member_count").get<std::size_t>();
      const auto values = c.at("values").get<std::vector<double>>();
      if (values.size() != kHoursPerDay) throw FormatError("centroid must have 24 values");
      std::copy(values.begin(), values.end(), centroid.values.begin());
      model.centroids.push_back(centroid);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(model_json.string() + ": " + e.what());
  }

  const auto lines = csv::read_lines(labels_csv);
  if (lines.empty() || lines[0] != "household_id,date,cluster_id") {
    throw FormatError(labels_csv.string() + ": expected header household_id,date,cluster_id");
  }
  std::vector<std::size_t> counts(model.centroids.size(), 0);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split(lines[i]);
    const auto date = f.size() == 3 ? Date::parse(f[1]) : std::nullopt;
    const auto id = f.size() == 3 ? csv::parse_int(f[2]) : std::nullopt;
    if (!date || !id || *id < 0 || static_cast<std::size_t>(*id) >= model.centroids.size()) {
      throw FormatError(labels_csv.string() + ":" + std::to_string(i + 1) + ": bad label row");
    }
    loaded.keys.push_back({std::string(f[0]), *date});
    model.labels.push_back(static_cast<std::size_t>(*id));
    ++counts[static_cast<std::size_t>(*id)];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] != model.centroids[c].member_count) {
      throw InvariantError(labels_csv.string() + ": cluster " + std::to_string(c) + " has " +
                           std::to_string(counts[c]) + " labelled shapes but model.json records " +
                           std::to_string(model.centroids[c].member_count));
    }
  }
  return loaded;
}

}  // namespace loadshape
