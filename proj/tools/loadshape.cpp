// loadshape: command line front end for the load-shape pipeline.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "loadshape/key_value.hpp"
#include "loadshape/pipeline.hpp"
#include "loadshape/synthetic.hpp"

namespace {

using namespace loadshape;

// Pipeline flags collected as config keys, so the config file and the
// command line go through one parser and flags win.
struct PipelineFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("--config", flags.config_file, "key=value config file; flags override it");
  const auto opt = [&](const std::string& name, const std::string& help) {
    return cmd->add_option_function<std::string>(
        "--" + name, [&flags, name](const std::string& v) { flags.values[name] = v; }, help);
  };
  opt("meter", "meter CSV (household_id,date,h1..h24)");
  opt("meter-format", "wide or long");
  opt("weather", "weather CSV (date,avg_temp_f)");
  opt("survey", "survey CSV (household_id + indicator columns)");
  opt("out", "output directory");
  opt("theta", "RSE threshold for adaptive k-means (default 0.3)");
  opt("merge-violation", "violation cap for hierarchical merging (default 0.05)");
  auto* v = opt("truncate-violation", "violation budget V for truncation (default 0.30)");
  // --V is the short spelling used in examples.
  cmd->add_option_function<std::string>(
         "--V", [&flags](const std::string& value) { flags.values["truncate-violation"] = value; }, "same as --truncate-violation")
      ->excludes(v);
  opt("sample", "clustering subsample size (default 100000, clamped to the corpus)");
  opt("seed", "master seed, required for cluster and analyze");
  opt("threads", "worker thread bound (0 = hardware)");
  opt("quartiles", "empirical or fixed:a,b,c");
  opt("coverage-weight", "total or discretionary");
  opt("bootstrap-resamples", "bootstrap resamples for characteristic deltas (default 10000)");
  opt("occurrence-targets", "comma separated dictionary ids for the occurrence map");
}

RunConfig resolve(const PipelineFlags& flags) {
  RunConfig config;
  if (!flags.config_file.empty()) apply_key_values(config, read_key_values(flags.config_file));
  apply_key_values(config, flags.values);
  validate(config);
  return config;
}

void report(const StageOutcome& outcome) {
  std::cout << stage_name(outcome.stage) << ": " << (outcome.cached ? "cached" : "done") << "\n";
  for (const auto& m : outcome.messages) std::cout << "  " << m << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster daily load shapes into a dictionary and measure their variability"};
  app.require_subcommand(1);

  std::string synth_out = "synthetic";
  std::string synth_spec;
  std::vector<std::string> synth_set;
  std::map<std::string, std::string> synth_values;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with ground truth");
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--spec", synth_spec, "key=value generator spec file");
  synth->add_option("--set", synth_set, "generator key=value override (repeatable)");
  for (const auto& [flag, key] : std::vector<std::pair<std::string, std::string>>{
           {"--seed", "seed"},
           {"--households", "households"},
           {"--days", "days"},
           {"--archetypes", "archetypes"},
           {"--start-date", "start_date"},
           {"--noise", "noise_level"},
           {"--temperature-response", "temperature_response"},
           {"--bad-day-fraction", "bad_day_fraction"},
       }) {
    synth->add_option_function<std::string>(
        flag, [&synth_values, key](const std::string& v) { synth_values[key] = v; }, "generator " + key);
  }

  struct StageCommand {
    const char* name;
    const char* help;
    std::vector<Stage> stages;
  };
  const std::vector<StageCommand> commands{
      {"ingest", "read and clean the meter data into shapes.csv", {Stage::kIngest}},
      {"cluster", "adaptive k-means and merging on a subsample", {Stage::kCluster}},
      {"truncate", "truncate the merged model into dictionary.json", {Stage::kTruncate}},
      {"assign", "assign every household-day to a dictionary shape", {Stage::kAssign}},
      {"analyze", "entropy, coverage, taxonomy and quality outputs", {Stage::kAnalyze}},
      {"run", "all stages in order", all_stages()},
  };
  std::vector<PipelineFlags> flags(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    subs.push_back(app.add_subcommand(commands[i].name, commands[i].help));
    add_pipeline_flags(subs.back(), flags[i]);
  }

  CLI11_PARSE(app, argc, argv);

  if (synth->parsed()) {
    try {
      std::map<std::string, std::string> kv;
      if (!synth_spec.empty()) kv = read_key_values(synth_spec);
      for (const auto& [k, v] : synth_values) kv[k] = v;
      for (const auto& item : synth_set) {
        for (const auto& [k, v] : parse_key_values(item, "--set")) kv[k] = v;
      }
      const auto spec = synthetic_spec_from_key_values(kv);
      const auto corpus = generate_synthetic(spec);
      write_synthetic(synth_out, corpus);
      std::cout << "synth: wrote " << corpus.meter.size() << " household-days for " << corpus.survey.size()
                << " households to " << synth_out << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: synth failed: " << e.what() << "\n";
      return 1;
    }
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    RunConfig config;
    try {
      config = resolve(flags[i]);
    } catch (const std::exception& e) {
      std::cerr << "error: invalid configuration: " << e.what() << "\n";
      return 2;
    }
    try {
      for (auto stage : commands[i].stages) report(run_stage(stage, config));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
