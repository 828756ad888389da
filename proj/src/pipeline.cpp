#include "loadshape/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>

#include <json.hpp>

#include "loadshape/analytics.hpp"
#include "loadshape/clustering.hpp"
#include "loadshape/csv.hpp"
#include "loadshape/dictionary.hpp"
#include "loadshape/digest.hpp"
#include "loadshape/parallel.hpp"
#include "loadshape/preprocess.hpp"
#include "loadshape/random.hpp"

namespace loadshape {

namespace fs = std::filesystem;

namespace {

double parse_number(const std::string& key, const std::string& value) {
  const auto v = csv::parse_double(value);
  if (!v) throw InvalidArgument("config " + key + ": '" + value + "' is not a number");
  return *v;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const auto v = csv::parse_int(value);
  if (!v || *v < 0) throw InvalidArgument("config " + key + ": '" + value + "' is not a non-negative integer");
  return static_cast<std::size_t>(*v);
}

std::vector<std::size_t> parse_id_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (auto f : csv::split(value)) out.push_back(parse_count(key, std::string(csv::trim(f))));
  return out;
}

std::string join_ids(const std::vector<std::size_t>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(ids[i]);
  }
  return out;
}

std::optional<TemperatureBins> fixed_bins(const std::string& mode) {
  if (mode == "empirical") return std::nullopt;
  if (mode.rfind("fixed:", 0) != 0) throw InvalidArgument("quartiles must be 'empirical' or 'fixed:a,b,c', got '" + mode + "'");
  const auto parts = csv::split(std::string_view(mode).substr(6));
  if (parts.size() != 3) throw InvalidArgument("fixed quartiles need three boundaries, got '" + mode + "'");
  std::array<double, 3> b{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = csv::parse_double(parts[i]);
    if (!v) throw InvalidArgument("bad quartile boundary in '" + mode + "'");
    b[i] = *v;
  }
  return fixed_temperature_bins(b[0], b[1], b[2]);
}

}  // namespace

void apply_key_values(RunConfig& c, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "meter") c.meter = value;
    else if (key == "weather") c.weather = value;
    else if (key == "survey") c.survey = value;
    else if (key == "out") c.out = value;
    else if (key == "meter-format") {
      if (value == "wide") c.meter_schema = MeterSchema::kWide;
      else if (value == "long") c.meter_schema = MeterSchema::kLong;
      else throw InvalidArgument("config meter-format: expected wide or long, got '" + value + "'");
    } else if (key == "theta") c.theta = parse_number(key, value);
    else if (key == "merge-violation") c.merge_max_violation = parse_number(key, value);
    else if (key == "truncate-violation") c.truncate_v = parse_number(key, value);
    else if (key == "sample") c.subsample_n = parse_count(key, value);
    else if (key == "seed") c.seed = parse_count(key, value);
    else if (key == "threads") c.threads = parse_count(key, value);
    else if (key == "quartiles") c.quartiles = value;
    else if (key == "coverage-weight") c.coverage_weight = value;
    else if (key == "bootstrap-resamples") c.bootstrap_resamples = parse_count(key, value);
    else if (key == "occurrence-targets") c.occurrence_targets = parse_id_list(key, value);
    else throw InvalidArgument("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> to_key_values(const RunConfig& c) {
  std::map<std::string, std::string> kv;
  kv["meter"] = c.meter.string();
  kv["weather"] = c.weather.string();
  kv["survey"] = c.survey.string();
  kv["out"] = c.out.string();
  kv["meter-format"] = c.meter_schema == MeterSchema::kWide ? "wide" : "long";
  kv["theta"] = csv::format_double(c.theta);
  kv["merge-violation"] = csv::format_double(c.merge_max_violation);
  kv["truncate-violation"] = csv::format_double(c.truncate_v);
  kv["sample"] = std::to_string(c.subsample_n);
  kv["seed"] = c.seed ? std::to_string(*c.seed) : std::string();
  kv["threads"] = std::to_string(c.threads);
  kv["quartiles"] = c.quartiles;
  kv["coverage-weight"] = c.coverage_weight;
  kv["bootstrap-resamples"] = std::to_string(c.bootstrap_resamples);
  kv["occurrence-targets"] = join_ids(c.occurrence_targets, ',');
  return kv;
}

void validate(const RunConfig& c) {
  if (!(c.theta > 0.0) || !std::isfinite(c.theta)) throw InvalidArgument("theta must be > 0, got " + csv::format_double(c.theta));
  const auto fraction = [](const char* name, double v) {
    if (!(v > 0.0 && v < 1.0)) throw InvalidArgument(std::string(name) + " must be in (0, 1), got " + csv::format_double(v));
  };
  fraction("merge-violation", c.merge_max_violation);
  fraction("truncate-violation", c.truncate_v);
  if (c.subsample_n == 0) throw InvalidArgument("sample must be positive");
  if (c.bootstrap_resamples == 0) throw InvalidArgument("bootstrap-resamples must be positive");
  if (c.coverage_weight != "total" && c.coverage_weight != "discretionary") {
    throw InvalidArgument("coverage-weight must be total or discretionary, got '" + c.coverage_weight + "'");
  }
  fixed_bins(c.quartiles);
  if (c.occurrence_targets.empty()) throw InvalidArgument("occurrence-targets must name at least one shape");
}

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return "ingest";
    case Stage::kCluster: return "cluster";
    case Stage::kTruncate: return "truncate";
    case Stage::kAssign: return "assign";
    case Stage::kAnalyze: return "analyze";
  }
  return "unknown";
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages{Stage::kIngest, Stage::kCluster, Stage::kTruncate, Stage::kAssign,
                                         Stage::kAnalyze};
  return stages;
}

std::string run_id(const RunConfig& config) {
  auto kv = to_key_values(config);
  // Neither changes any number written.
  kv.erase("threads");
  kv.erase("out");
  std::string text;
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  return sha256_hex(text).substr(0, 16);
}

namespace {

// Artifact file names and the stage that writes each.
constexpr const char* kShapes = "shapes.csv";
constexpr const char* kCleaning = "cleaning_report.csv";
constexpr const char* kDiagnostics = "ingest_diagnostics.csv";
constexpr const char* kModel = "model.json";
constexpr const char* kLabels = "labels.csv";
constexpr const char* kDictionary = "dictionary.json";
constexpr const char* kTruncation = "truncation.csv";
constexpr const char* kAssignments = "assignments.csv";

const std::map<std::string, Stage>& producers() {
  static const std::map<std::string, Stage> m{
      {kShapes, Stage::kIngest},      {kCleaning, Stage::kIngest},       {kDiagnostics, Stage::kIngest},
      {kModel, Stage::kCluster},      {kLabels, Stage::kCluster},        {kDictionary, Stage::kTruncate},
      {kTruncation, Stage::kTruncate}, {kAssignments, Stage::kAssign},
  };
  return m;
}

std::vector<std::string> stage_outputs(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return {kShapes, kCleaning, kDiagnostics};
    case Stage::kCluster: return {kModel, kLabels};
    case Stage::kTruncate: return {kDictionary, kTruncation};
    case Stage::kAssign: return {kAssignments};
    case Stage::kAnalyze:
      return {"entropy_by_stratum.csv", "coverage_curve.csv", "taxonomy.csv",     "household_entropy.csv",
              "char_deltas.csv",        "occurrence_map.csv", "quality.csv"};
  }
  return {};
}

std::vector<std::string> stage_artifact_inputs(Stage stage) {
  switch (stage) {
    case Stage::kIngest: return {};
    case Stage::kCluster: return {kShapes};
    case Stage::kTruncate: return {kModel, kLabels, kShapes};
    case Stage::kAssign: return {kShapes, kDictionary};
    case Stage::kAnalyze: return {kAssignments, kDictionary, kShapes};
  }
  return {};
}

std::map<std::string, std::string> stage_params(Stage stage, const RunConfig& c) {
  const auto kv = to_key_values(c);
  std::map<std::string, std::string> p;
  const auto take = [&](const char* k) { p[k] = kv.at(k); };
  switch (stage) {
    case Stage::kIngest: take("meter-format"); break;
    case Stage::kCluster:
      take("theta");
      take("merge-violation");
      take("sample");
      take("seed");
      p["subsample_algorithm"] = kSubsampleAlgorithm;
      p["rng"] = kRngAlgorithm;
      break;
    case Stage::kTruncate: take("truncate-violation"); break;
    case Stage::kAssign: break;
    case Stage::kAnalyze:
      take("theta");
      take("quartiles");
      take("coverage-weight");
      take("bootstrap-resamples");
      take("seed");
      take("occurrence-targets");
      break;
  }
  return p;
}

std::string hash_params(const std::map<std::string, std::string>& params) {
  std::string text;
  for (const auto& [k, v] : params) text += k + "=" + v + "\n";
  return sha256_hex(text);
}

nlohmann::json read_manifest(const fs::path& dir) {
  const auto path = dir / kManifestFile;
  if (!fs::exists(path)) return nlohmann::json{{"stages", nlohmann::json::object()}};
  std::ifstream in(path);
  try {
    auto doc = nlohmann::json::parse(in);
    if (!doc.contains("stages") || !doc["stages"].is_object()) doc["stages"] = nlohmann::json::object();
    return doc;
  } catch (const nlohmann::json::exception&) {
    // A damaged manifest only costs a recomputation.
    return nlohmann::json{{"stages", nlohmann::json::object()}};
  }
}

void write_manifest(const fs::path& dir, const nlohmann::json& doc) {
  csv::write_file(dir / kManifestFile, doc.dump(2) + "\n");
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Inputs {
  // Name in the manifest -> file.
  std::map<std::string, fs::path> files;
};

Inputs gather_inputs(Stage stage, const RunConfig& c) {
  Inputs in;
  for (const auto& name : stage_artifact_inputs(stage)) {
    const auto path = c.out / name;
    if (!fs::exists(path)) {
      throw MissingArtifactError(name + " not found in " + c.out.string() + ": run `" +
                                 std::string(stage_name(producers().at(name))) + "` first");
    }
    in.files[name] = path;
  }
  const auto external = [&](const char* name, const fs::path& p, bool required) {
    if (p.empty()) {
      if (required) throw InvalidArgument(std::string("--") + name + " is required");
      return;
    }
    if (!fs::exists(p)) throw IoError(std::string(name) + " file '" + p.string() + "' does not exist");
    in.files[name] = p;
  };
  if (stage == Stage::kIngest) {
    external("meter", c.meter, true);
    external("weather", c.weather, false);
    external("survey", c.survey, false);
  }
  if (stage == Stage::kAnalyze) {
    external("weather", c.weather, false);
    external("survey", c.survey, false);
  }
  return in;
}

std::map<std::string, std::string> digests(const std::map<std::string, fs::path>& files) {
  std::map<std::string, std::string> out;
  for (const auto& [name, path] : files) out[name] = sha256_file(path);
  return out;
}

bool cached(const nlohmann::json& entry, const std::string& params_hash, const std::map<std::string, std::string>& inputs,
            const fs::path& dir) {
  if (!entry.is_object() || entry.value("params_hash", "") != params_hash) return false;
  if (!entry.contains("inputs") || entry["inputs"].get<std::map<std::string, std::string>>() != inputs) return false;
  if (!entry.contains("outputs")) return false;
  for (const auto& [name, digest] : entry["outputs"].get<std::map<std::string, std::string>>()) {
    const auto path = dir / name;
    if (!fs::exists(path) || sha256_file(path) != digest) return false;
  }
  return true;
}

std::uint64_t require_seed(Stage stage, const RunConfig& c) {
  if (!c.seed) throw InvalidArgument("stage " + std::string(stage_name(stage)) + " is stochastic and needs --seed");
  return *c.seed;
}

// Shapes of the clustering subsample, in label order.
std::vector<ShapeVector> shapes_for_keys(const std::vector<ShapeVector>& all, const std::vector<DayKey>& keys) {
  std::map<DayKey, std::size_t> index;
  for (std::size_t i = 0; i < all.size(); ++i) index.emplace(all[i].source, i);
  std::vector<ShapeVector> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    const auto it = index.find(k);
    if (it == index.end()) {
      throw InvariantError("labels.csv names " + k.household_id + " " + k.date.iso() + ", which is not in shapes.csv");
    }
    out.push_back(all[it->second]);
  }
  return out;
}

void do_ingest(const RunConfig& c, StageOutcome& outcome) {
  const auto meter = read_meter_corpus(c.meter, c.meter_schema);
  std::string diag = "source,line,message\n";
  for (const auto& d : meter.diagnostics) csv::append_row(diag, {"meter", std::to_string(d.line), d.message});
  if (!c.weather.empty()) {
    for (const auto& d : read_weather(c.weather).diagnostics) {
      csv::append_row(diag, {"weather", std::to_string(d.line), d.message});
    }
  }
  if (!c.survey.empty()) {
    for (const auto& d : read_survey(c.survey).diagnostics) {
      csv::append_row(diag, {"survey", std::to_string(d.line), d.message});
    }
  }
  const auto shapes = build_shapes(meter.days);
  if (shapes.shapes.empty()) throw EmptyInputError("no household-day survived cleaning");
  write_shapes(c.out / kShapes, shapes.shapes);
  write_cleaning_report(c.out / kCleaning, shapes.report);
  csv::write_file(c.out / kDiagnostics, diag);
  outcome.messages.push_back(std::to_string(shapes.report.retained) + " of " + std::to_string(shapes.report.input) +
                             " household-days retained, " + std::to_string(meter.diagnostics.size()) +
                             " meter diagnostics");
}

void do_cluster(const RunConfig& c, StageOutcome& outcome) {
  const auto seed = require_seed(Stage::kCluster, c);
  const auto all = read_shapes(c.out / kShapes);
  std::size_t n = c.subsample_n;
  if (n > all.size()) {
    outcome.messages.push_back("warning: sample " + std::to_string(n) + " exceeds the corpus; clamped to " +
                               std::to_string(all.size()));
    n = all.size();
  }
  const auto sample = subsample(all, n, mix_seed(seed, 1));
  auto adaptive = adaptive_kmeans(sample, c.theta, mix_seed(seed, 2));
  for (const auto& w : adaptive.warnings) outcome.messages.push_back("warning: " + w);
  const auto merged = hierarchical_merge(adaptive, sample, c.merge_max_violation);
  save_model(c.out / kModel, c.out / kLabels, merged, sample);
  outcome.messages.push_back("K1=" + std::to_string(merged.info.k1) + " K2=" + std::to_string(merged.info.k2) +
                             " violation=" + csv::format_double(merged.violation_rate));
}

void do_truncate(const RunConfig& c, const std::map<std::string, std::string>& input_digests, StageOutcome& outcome) {
  const auto loaded = load_model(c.out / kModel, c.out / kLabels);
  const auto sample = shapes_for_keys(read_shapes(c.out / kShapes), loaded.keys);
  auto result = truncate(loaded.model, sample, c.truncate_v);
  auto& dict = result.dictionary;
  dict.provenance["run_id"] = run_id(c);
  for (const auto& [k, v] : stage_params(Stage::kCluster, c)) dict.provenance["param." + k] = v;
  dict.provenance["param.truncate-violation"] = csv::format_double(c.truncate_v);
  for (const auto& [name, digest] : input_digests) dict.provenance["input." + name] = digest;
  save_dictionary(c.out / kDictionary, dict);

  std::string steps = "iteration,clusters_before,removed_clusters,removed_members,violation_after\n";
  for (std::size_t i = 0; i < result.steps.size(); ++i) {
    const auto& s = result.steps[i];
    csv::append_row(steps, {std::to_string(i + 1), std::to_string(s.clusters_before), std::to_string(s.removed_clusters),
                            std::to_string(s.removed_members), csv::format_double(s.violation_after)});
  }
  csv::write_file(c.out / kTruncation, steps);
  outcome.messages.push_back(std::to_string(dict.size()) + " dictionary shapes, violation " +
                             csv::format_double(result.violation_final));
}

void do_assign(const RunConfig& c, StageOutcome& outcome) {
  const auto shapes = read_shapes(c.out / kShapes);
  const auto dict = load_dictionary(c.out / kDictionary);
  const auto assignments = assign_all(shapes, dict);
  write_assignments(c.out / kAssignments, shapes, assignments);
  outcome.messages.push_back(std::to_string(assignments.size()) + " household-days assigned");
}

std::string no_commas(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

void do_analyze(const RunConfig& c, StageOutcome& outcome) {
  const auto shapes = read_shapes(c.out / kShapes);
  const auto dict = load_dictionary(c.out / kDictionary);
  const auto assigned = read_assignments(c.out / kAssignments);
  if (assigned.size() != shapes.size()) throw InvariantError("assignments.csv does not cover shapes.csv; run `assign` again");
  const std::size_t k = dict.size();

  std::vector<WeatherDay> weather;
  if (!c.weather.empty()) weather = read_weather(c.weather).days;
  std::map<Date, double> temps;
  for (const auto& w : weather) temps[w.date] = w.avg_temp_f;

  std::vector<AssignedDay> records;
  records.reserve(shapes.size());
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (!(assigned[i].key == shapes[i].source)) throw InvariantError("assignments.csv is out of step with shapes.csv");
    if (assigned[i].assignment.shape_id >= k) throw InvariantError("assignments.csv refers to a shape outside the dictionary");
    AssignedDay r{shapes[i].source, assigned[i].assignment.shape_id, shapes[i].day_total_kwh,
                  shapes[i].discretionary_kwh, std::nullopt};
    const auto t = temps.find(r.key.date);
    if (t != temps.end()) r.avg_temp_f = t->second;
    records.push_back(std::move(r));
  }

  Provenance prov;
  prov["run_id"] = run_id(c);
  prov["dictionary_digest"] = dictionary_digest(dict);
  for (const auto& [key, v] : to_key_values(c)) {
    if (key == "out" || key == "threads" || key == "meter" || key == "weather" || key == "survey") continue;
    prov[key] = no_commas(v);
  }
  const PeakOptions peaks;
  prov["peak-prominence"] = csv::format_double(peaks.min_prominence_fraction);
  prov["peak-separation-hours"] = std::to_string(peaks.min_separation_hours);

  // Entropy by stratum. The temperature axis only sees summer days with a
  // known temperature.
  std::vector<Stratum> strata{{"all", "all", [](const AssignedDay&) { return true; }}};
  for (auto& s : season_strata()) strata.push_back(std::move(s));
  for (auto& s : day_type_strata()) strata.push_back(std::move(s));
  auto report = stratified_entropy(records, strata, k);
  std::vector<AssignedDay> summer;
  for (const auto& r : records) {
    if (season_of(r.key.date) == Season::kSummer && r.avg_temp_f) summer.push_back(r);
  }
  std::optional<TemperatureBins> bins = fixed_bins(c.quartiles);
  if (!bins) {
    const auto summer_temps = summer_temperatures(weather);
    if (summer_temps.size() >= 4) {
      try {
        bins = temperature_quartiles(summer_temps);
      } catch (const InvalidArgument& e) {
        outcome.messages.push_back(std::string("warning: temperature strata skipped: ") + e.what());
      }
    } else {
      outcome.messages.push_back("warning: temperature strata skipped: no summer weather");
    }
  }
  if (bins) {
    prov["temperature-bounds"] = csv::format_double(bins->boundaries[0]) + ";" + csv::format_double(bins->boundaries[1]) +
                                 ";" + csv::format_double(bins->boundaries[2]);
    const auto t = stratified_entropy(summer, temperature_strata(*bins), k);
    report.insert(report.end(), t.begin(), t.end());
  }
  write_entropy_report(c.out / "entropy_by_stratum.csv", report, prov);

  std::vector<std::size_t> ids;
  std::vector<double> weights;
  ids.reserve(records.size());
  weights.reserve(records.size());
  for (const auto& r : records) {
    ids.push_back(r.shape_id);
    weights.push_back(c.coverage_weight == "total" ? r.day_total_kwh : r.discretionary_kwh);
  }
  write_coverage_curve(c.out / "coverage_curve.csv", coverage_curve(ids, weights, k), prov);
  const auto centers = dict.centers();
  write_taxonomy(c.out / "taxonomy.csv", peak_taxonomy(centers, peaks), prov);

  // Household entropy over summer days, falling back to the whole record.
  const bool use_summer = !std::none_of(records.begin(), records.end(), [](const AssignedDay& r) {
    return season_of(r.key.date) == Season::kSummer;
  });
  const auto period = [use_summer](const AssignedDay& r) {
    return !use_summer || season_of(r.key.date) == Season::kSummer;
  };
  const auto hh = household_entropy(records, k, period);
  std::map<std::string, std::size_t> hh_days;
  for (const auto& r : records) {
    if (period(r)) ++hh_days[r.key.household_id];
  }
  auto hh_prov = prov;
  hh_prov["period"] = use_summer ? "summer" : "all";
  write_household_entropy(c.out / "household_entropy.csv", hh, hh_days, hh_prov);

  std::vector<CharacteristicDelta> deltas;
  if (!c.survey.empty()) {
    const auto survey = read_survey(c.survey).households;
    BootstrapOptions boot;
    boot.resamples = c.bootstrap_resamples;
    const auto seed = require_seed(Stage::kAnalyze, c);
    for (auto indicator : all_indicators()) {
      boot.seed = mix_seed(seed, 100 + static_cast<std::uint64_t>(indicator));
      try {
        deltas.push_back(characteristic_entropy_delta(hh, survey, indicator, boot));
      } catch (const InvalidArgument& e) {
        outcome.messages.push_back(std::string("note: ") + e.what());
      }
    }
  } else {
    outcome.messages.push_back("warning: no survey; characteristic deltas left empty");
  }
  write_characteristic_deltas(c.out / "char_deltas.csv", deltas, hh_prov);

  std::vector<std::size_t> targets;
  for (auto t : c.occurrence_targets) {
    if (t < k) targets.push_back(t);
  }
  if (targets.empty()) targets.push_back(0);
  auto occ_prov = prov;
  occ_prov["occurrence-targets"] = join_ids(targets, ';');
  write_occurrence_map(c.out / "occurrence_map.csv", occurrence_map(records, targets, weather, k), occ_prov);

  // Davies-Bouldin over the clusters the full corpus actually populates.
  std::vector<std::size_t> members(k, 0);
  for (const auto& r : records) ++members[r.shape_id];
  std::vector<std::size_t> remap(k, 0);
  std::vector<HourlyProfile> used;
  for (std::size_t i = 0; i < k; ++i) {
    if (members[i] > 0) {
      remap[i] = used.size();
      used.push_back(centers[i]);
    }
  }
  std::string dbi = "";
  if (used.size() >= 2) {
    std::vector<HourlyProfile> points;
    std::vector<std::size_t> labels;
    points.reserve(records.size());
    labels.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      points.push_back(shapes[i].values);
      labels.push_back(remap[records[i].shape_id]);
    }
    dbi = csv::format_double(davies_bouldin(points, labels, used));
  }
  std::size_t violating = 0;
  for (const auto& a : assigned) violating += violates(a.assignment.rse, dict.theta) ? 1 : 0;
  std::string q = provenance_line(prov) + "metric,value\n";
  csv::append_row(q, {"dictionary_size", std::to_string(k)});
  csv::append_row(q, {"populated_shapes", std::to_string(used.size())});
  csv::append_row(q, {"davies_bouldin", dbi});
  csv::append_row(q, {"assigned_days", std::to_string(records.size())});
  csv::append_row(q, {"assigned_violation_rate",
                      csv::format_double(static_cast<double>(violating) / static_cast<double>(records.size()))});
  for (const char* key : {"violation_initial", "violation_before_exit", "violation_final"}) {
    const auto it = dict.provenance.find(key);
    csv::append_row(q, {std::string("truncation_") + key, it == dict.provenance.end() ? std::string() : it->second});
  }
  csv::write_file(c.out / "quality.csv", q);
  outcome.messages.push_back(std::to_string(report.size()) + " strata, " + std::to_string(hh.size()) +
                             " households, DBI " + (dbi.empty() ? std::string("n/a") : dbi));
}

}  // namespace

StageOutcome run_stage(Stage stage, const RunConfig& config) {
  StageOutcome outcome;
  outcome.stage = stage;
  const auto outputs = stage_outputs(stage);
  const auto key = std::string(stage_name(stage));
  try {
    validate(config);
    parallel::set_max_threads(config.threads);
    fs::create_directories(config.out);
    const auto inputs = gather_inputs(stage, config);
    const auto input_digests = digests(inputs.files);
    const auto params = stage_params(stage, config);
    const auto params_hash = hash_params(params);
    auto manifest = read_manifest(config.out);
    if (manifest["stages"].contains(key) && cached(manifest["stages"][key], params_hash, input_digests, config.out)) {
      outcome.cached = true;
      return outcome;
    }
    manifest["stages"].erase(key);
    write_manifest(config.out, manifest);

    switch (stage) {
      case Stage::kIngest: do_ingest(config, outcome); break;
      case Stage::kCluster: do_cluster(config, outcome); break;
      case Stage::kTruncate: do_truncate(config, input_digests, outcome); break;
      case Stage::kAssign: do_assign(config, outcome); break;
      case Stage::kAnalyze: do_analyze(config, outcome); break;
    }

    std::map<std::string, fs::path> produced;
    for (const auto& name : outputs) produced[name] = config.out / name;
    nlohmann::json entry;
    entry["params"] = params;
    entry["params_hash"] = params_hash;
    entry["inputs"] = input_digests;
    entry["outputs"] = digests(produced);
    entry["completed_at"] = now_utc();
    manifest = read_manifest(config.out);
    manifest["run_id"] = run_id(config);
    manifest["stages"][key] = entry;
    write_manifest(config.out, manifest);
    return outcome;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& name : outputs) fs::remove(config.out / name, ec);
    throw StageError(stage, e.what());
  }
}

std::vector<StageOutcome> run_pipeline(const RunConfig& config) {
  std::vector<StageOutcome> out;
  for (auto stage : all_stages()) out.push_back(run_stage(stage, config));
  return out;
}

}  // namespace loadshape
