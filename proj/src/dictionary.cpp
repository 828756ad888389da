#include "loadshape/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "loadshape/csv.hpp"
#include "loadshape/digest.hpp"
#include "loadshape/error.hpp"
#include "loadshape/parallel.hpp"

namespace loadshape {

std::vector<HourlyProfile> ClusterDictionary::centers() const {
  std::vector<HourlyProfile> out;
  out.reserve(shapes.size());
  for (const auto& s : shapes) out.push_back(s.values);
  return out;
}

namespace {

// Nearest among the listed centroid ids; ties to the lowest id.
std::size_t nearest_among(const HourlyProfile& point, const std::vector<HourlyProfile>& centers,
                          const std::vector<std::size_t>& ids) {
  std::size_t best = ids.front();
  double best_d = squared_distance(point, centers[best]);
  for (std::size_t p = 1; p < ids.size(); ++p) {
    const double d = squared_distance(point, centers[ids[p]]);
    if (d < best_d || (d == best_d && ids[p] < best)) {
      best_d = d;
      best = ids[p];
    }
  }
  return best;
}

std::size_t count_violations(const std::vector<HourlyProfile>& centers, const std::vector<std::size_t>& labels,
                             std::span<const ShapeVector> shapes, double theta) {
  std::vector<char> flag(shapes.size(), 0);
  parallel::for_chunks(shapes.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) flag[i] = violates(rse(shapes[i].values, centers[labels[i]]), theta);
  });
  return static_cast<std::size_t>(std::count(flag.begin(), flag.end(), 1));
}

}  // namespace

TruncationResult truncate(const ClusterModel& model, std::span<const ShapeVector> shapes, double v) {
  if (model.centroids.empty()) throw EmptyInputError("truncation of an empty cluster model");
  if (!(v > 0.0 && v < 1.0)) throw InvalidArgument("truncation violation budget V must lie in (0, 1)");
  if (model.labels.size() != shapes.size()) throw InvalidArgument("model labels do not match the shape count");

  const std::size_t n = shapes.size();
  const std::size_t k = model.centroids.size();
  std::vector<HourlyProfile> centers(k);
  for (std::size_t c = 0; c < k; ++c) centers[c] = model.centroids[c].values;
  std::vector<std::size_t> labels = model.labels;
  std::vector<std::size_t> counts(k, 0);
  for (auto l : labels) ++counts[l];
  std::vector<std::size_t> alive(k);
  std::iota(alive.begin(), alive.end(), 0);

  // Floor of V*N; the epsilon keeps products like 0.1 * 100 at 10.
  const auto budget = static_cast<std::size_t>(std::floor(v * static_cast<double>(n) + 1e-9));

  TruncationResult result;
  double rate = n == 0 ? 0.0 : static_cast<double>(count_violations(centers, labels, shapes, model.theta)) / n;
  result.violation_initial = rate;
  result.violation_before_exit = rate;

  while (rate < v && alive.size() > 1) {
    TruncationStep step;
    step.clusters_before = alive.size();
    std::vector<std::size_t> by_size = alive;
    std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
      return counts[a] != counts[b] ? counts[a] < counts[b] : a < b;
    });
    std::vector<char> remove(k, 0);
    std::size_t cumulative = 0;
    for (std::size_t p = 0; p + 1 < by_size.size(); ++p) {
      const auto c = by_size[p];
      if (step.removed_clusters > 0 && cumulative + counts[c] > budget) break;
      if (step.removed_clusters == 0 && counts[c] > budget) {
        // Smallest cluster alone exceeds the budget: still remove it.
        remove[c] = 1;
        cumulative += counts[c];
        ++step.removed_clusters;
        break;
      }
      remove[c] = 1;
      cumulative += counts[c];
      ++step.removed_clusters;
    }
    step.removed_members = cumulative;

    std::vector<std::size_t> remaining;
    for (auto c : alive) {
      if (!remove[c]) remaining.push_back(c);
    }
    std::vector<std::size_t> orphans;
    for (std::size_t i = 0; i < n; ++i) {
      if (remove[labels[i]]) orphans.push_back(i);
    }
    parallel::for_chunks(orphans.size(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        const auto i = orphans[p];
        labels[i] = nearest_among(shapes[i].values, centers, remaining);
      }
    });
    for (auto c : alive) {
      if (remove[c]) counts[c] = 0;
    }
    for (auto i : orphans) ++counts[labels[i]];
    alive = std::move(remaining);

    result.violation_before_exit = rate;
    rate = static_cast<double>(count_violations(centers, labels, shapes, model.theta)) / n;
    step.violation_after = rate;
    result.steps.push_back(step);
  }
  result.violation_final = rate;

  std::vector<double> kwh(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) kwh[labels[i]] += shapes[i].day_total_kwh;
  std::vector<std::size_t> order = alive;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return kwh[a] != kwh[b] ? kwh[a] > kwh[b] : a < b;
  });
  std::vector<std::size_t> remap(k, 0);
  auto& dict = result.dictionary;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto c = order[r];
    remap[c] = r;
    dict.shapes.push_back({r, centers[c], counts[c], kwh[c]});
  }
  result.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = remap[labels[i]];

  dict.truncation_v = v;
  dict.theta = model.theta;
  dict.provenance["model_seed"] = std::to_string(model.seed);
  dict.provenance["model_clusters"] = std::to_string(k);
  dict.provenance["shape_count"] = std::to_string(n);
  dict.provenance["truncation_iterations"] = std::to_string(result.steps.size());
  dict.provenance["violation_initial"] = csv::format_double(result.violation_initial);
  dict.provenance["violation_before_exit"] = csv::format_double(result.violation_before_exit);
  dict.provenance["violation_final"] = csv::format_double(result.violation_final);
  return result;
}

std::vector<Assignment> assign_all(std::span<const ShapeVector> shapes, const ClusterDictionary& dictionary) {
  if (dictionary.shapes.empty()) throw EmptyInputError("assignment against an empty dictionary");
  const auto centers = dictionary.centers();
  std::vector<Assignment> out(shapes.size());
  parallel::for_chunks(shapes.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [c, d2] = nearest_centroid(shapes[i].values, centers);
      out[i] = {c, std::sqrt(d2), rse(shapes[i].values, centers[c])};
    }
  });
  return out;
}

namespace {

nlohmann::json to_json(const ClusterDictionary& dict) {
  nlohmann::json doc;
  doc["schema"] = "loadshape.dictionary";
  doc["schema_version"] = kDictionarySchemaVersion;
  doc["ordering"] = "kwh_desc";
  doc["theta"] = dict.theta;
  doc["truncation_v"] = dict.truncation_v;
  doc["provenance"] = dict.provenance;
  auto& shapes = doc["shapes"] = nlohmann::json::array();
  for (const auto& s : dict.shapes) {
    shapes.push_back({{"id", s.id}, {"member_count", s.member_count}, {"kwh", s.kwh}, {"values", s.values}});
  }
  return doc;
}

void check_invariants(const ClusterDictionary& dict, const std::string& origin) {
  if (dict.shapes.empty()) throw InvariantError(origin + ": dictionary has no shapes");
  for (std::size_t r = 0; r < dict.shapes.size(); ++r) {
    const auto& s = dict.shapes[r];
    if (s.id != r) throw InvariantError(origin + ": shape at position " + std::to_string(r) + " has id " +
                                        std::to_string(s.id));
    double sum = 0.0;
    for (double v : s.values) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InvariantError(origin + ": shape " + std::to_string(s.id) + " has a negative or non-finite value");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InvariantError(origin + ": shape " + std::to_string(s.id) + " sums to " + csv::format_double(sum) +
                           ", expected 1 +- 1e-6");
    }
    if (r > 0 && dict.shapes[r - 1].kwh < s.kwh) {
      throw InvariantError(origin + ": shapes are not ordered by descending kWh at id " + std::to_string(s.id));
    }
  }
}

}  // namespace

std::string dictionary_digest(const ClusterDictionary& dictionary) { return sha256_hex(to_json(dictionary).dump()); }

void save_dictionary(const std::filesystem::path& path, const ClusterDictionary& dictionary) {
  check_invariants(dictionary, path.string());
  auto doc = to_json(dictionary);
  doc["digest"] = sha256_hex(to_json(dictionary).dump());
  csv::write_file(path, doc.dump(1) + "\n");
}

ClusterDictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  ClusterDictionary dict;
  std::string stored_digest;
  try {
    if (doc.at("schema").get<std::string>() != "loadshape.dictionary") {
      throw FormatError(path.string() + ": not a dictionary file");
    }
    const int version = doc.at("schema_version").get<int>();
    if (version != kDictionarySchemaVersion) throw VersionMismatchError(version, kDictionarySchemaVersion);
    dict.theta = doc.at("theta").get<double>();
    dict.truncation_v = doc.at("truncation_v").get<double>();
    dict.provenance = doc.at("provenance").get<std::map<std::string, std::string>>();
    for (const auto& s : doc.at("shapes")) {
      DictionaryShape shape;
      shape.id = s.at("id").get<std::size_t>();
      shape.member_count = s.at("member_count").get<std::size_t>();
      shape.kwh = s.at("kwh").get<double>();
      const auto values = s.at("values").get<std::vector<double>>();
      if (values.size() != kHoursPerDay) throw FormatError(path.string() + ": shape must have 24 values");
      std::copy(values.begin(), values.end(), shape.values.begin());
      dict.shapes.push_back(shape);
    }
    stored_digest = doc.at("digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const auto actual = dictionary_digest(dict);
  if (actual != stored_digest) {
    throw DigestMismatchError(path.string() + ": digest mismatch, file records " + stored_digest + " but content hashes to " +
                              actual);
  }
  check_invariants(dict, path.string());
  return dict;
}

void write_assignments(const std::filesystem::path& path, std::span<const ShapeVector> shapes,
                       std::span<const Assignment> assignments) {
  if (shapes.size() != assignments.size()) throw InvalidArgument("assignment count does not match shape count");
  std::string out = "household_id,date,cluster_id,distance,rse\n";
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    csv::append_row(out, {shapes[i].source.household_id, shapes[i].source.date.iso(),
                          std::to_string(assignments[i].shape_id), csv::format_double(assignments[i].distance),
                          csv::format_double(assignments[i].rse)});
  }
  csv::write_file(path, out);
}

std::vector<AssignmentRecord> read_assignments(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != "household_id,date,cluster_id,distance,rse") {
    throw FormatError(path.string() + ": expected header household_id,date,cluster_id,distance,rse");
  }
  std::vector<AssignmentRecord> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split(lines[i]);
    if (f.size() != 5) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected 5 columns");
    const auto date = Date::parse(f[1]);
    const auto id = csv::parse_int(f[2]);
    const auto dist = csv::parse_double(f[3]);
    const auto r = csv::parse_double(f[4]);
    if (!date || !id || *id < 0 || !dist || !r) {
      throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": bad assignment row");
    }
    out.push_back({{std::string(f[0]), *date}, {static_cast<std::size_t>(*id), *dist, *r}});
  }
  return out;
}

}  // namespace loadshape
