// Command-line front end: data collection, model fitting, bound estimation,
// single closed-loop runs, the full benchmark and plot-data emission.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "droc/config.hpp"
#include "droc/errors.hpp"
#include "droc/experiment.hpp"
#include "droc/kl_bound.hpp"
#include "droc/training_set_io.hpp"

namespace fs = std::filesystem;
using namespace droc;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

RunConfig resolveConfig(const GlobalOptions& g) {
  RunConfig cfg = g.config_path.empty() ? defaultConfig() : loadConfig(g.config_path);
  if (g.seed) cfg.root_seed = *g.seed;
  return cfg;
}

nlohmann::json readJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

std::size_t mixtureIndex(const RunConfig& cfg, const std::string& name) {
  for (std::size_t i = 0; i < cfg.mixtures.size(); ++i) {
    if (cfg.mixtures[i].first == name) return i;
  }
  throw InvalidArgument("no mixture named '" + name + "' in the configuration");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven distributionally robust control toolkit"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", global.seed, "Root seed (overrides the configuration)");
  app.add_option("--out", global.out_dir, "Output directory");

  std::string mixture = "b";
  std::string training_path;
  std::string models_path;
  std::string bound_path;
  std::string mode = "droc";
  std::string input_dir;

  auto* collect = app.add_subcommand("collect", "Sample noise on the state grid and write a training set");
  collect->add_option("--mixture", mixture, "Mixture name from the configuration");

  auto* fit = app.add_subcommand("fit", "Fit the per-dimension variance GPs to a training set");
  fit->add_option("--training", training_path, "Training-set file")->required()->check(CLI::ExistingFile);

  auto* bound = app.add_subcommand("estimate-bound", "Global maximum KL bound over receding horizons");
  bound->add_option("--training", training_path, "Training-set file")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "One closed-loop MPC run");
  run->add_option("--mode", mode, "droc or ilqg")->check(CLI::IsMember({"droc", "ilqg"}));
  run->add_option("--mixture", mixture, "True-noise mixture name");
  run->add_option("--models", models_path, "GP models JSON (learned from fresh data if absent)");
  run->add_option("--bound", bound_path, "Bound JSON providing d_max (estimated if absent)");

  auto* bench = app.add_subcommand("benchmark", "Paired DROC/iLQG study over all mixtures");

  auto* show = app.add_subcommand("show-config", "Print the resolved configuration as JSON");

  auto* plots = app.add_subcommand("emit-plots", "Rewrite plot data from a benchmark directory");
  plots->add_option("--in", input_dir, "Benchmark output directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolveConfig(global);
    if (show->parsed()) {
      std::cout << cfg.toJson().dump(2) << "\n";
      return 0;
    }
    const fs::path out(global.out_dir);
    fs::create_directories(out);
    const SeedPlan seeds{cfg.root_seed};

    if (collect->parsed()) {
      const std::size_t mi = mixtureIndex(cfg, mixture);
      const TrainingSet ts = collectForConfig(cfg, cfg.mixtures[mi].second, seeds.collection(mi));
      writeTrainingSet(ts, out / "training_set.bin");
      std::cout << "wrote " << (out / "training_set.bin").string() << " (m=" << ts.numStates()
                << ", N=" << ts.numRealizations() << ")\n";
    } else if (fit->parsed()) {
      const TrainingSet ts = readTrainingSet(training_path);
      GpFitOptions opts = cfg.gp;
      opts.seed = cfg.root_seed;
      const StateDependentReference ref = fitStateDependent(ts, opts, cfg.min_variance);
      writeFileAtomically(out / "gp_models.json", ref.toJson().dump(2) + "\n");
      std::cout << "wrote " << (out / "gp_models.json").string() << "\n";
    } else if (bound->parsed()) {
      const TrainingSet ts = readTrainingSet(training_path);
      const HorizonBound hb = horizonBound(ts, cfg.horizon, cfg.knn, cfg.root_seed);
      const nlohmann::json j = {{"d_max", hb.d_max}, {"per_window", hb.per_window},
                                {"degenerate", hb.degenerate}, {"k", cfg.knn.k},
                                {"M", cfg.knn.M},   {"n", cfg.horizon},
                                {"seed", cfg.root_seed}};
      writeFileAtomically(out / "bound.json", j.dump(2) + "\n");
      std::cout << "d_max = " << hb.d_max << " over " << hb.per_window.size() << " windows\n";
    } else if (run->parsed()) {
      const std::size_t mi = mixtureIndex(cfg, mixture);
      const MixtureNoise& truth = cfg.mixtures[mi].second;
      StateDependentReference ref;
      double d = 0.0;
      if (!models_path.empty() && !bound_path.empty()) {
        ref = StateDependentReference::fromJson(readJson(models_path));
        d = readJson(bound_path).at("d_max").get<double>();
      } else {
        const LearnedNoiseModel learned =
            learnNoiseModel(cfg, truth, seeds.collection(mi), seeds.gp(mi), seeds.bound(mi));
        ref = models_path.empty() ? learned.reference
                                  : StateDependentReference::fromJson(readJson(models_path));
        d = bound_path.empty() ? learned.bound.d_max
                               : readJson(bound_path).at("d_max").get<double>();
      }
      const auto start = std::chrono::steady_clock::now();
      const MpcRecord rec =
          runCase(cfg, truth, ref, d, controllerModeFromString(mode), seeds.run(mi, 0));
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      nlohmann::json j = recordToJson(rec);
      j["mixture"] = mixture;
      j["d"] = d;
      j["timing_seconds"] = seconds;
      const fs::path file = out / ("run_" + mode + "_" + mixture + ".json");
      writeFileAtomically(file, j.dump(2) + "\n");
      std::cout << mode << " final distance " << rec.final_distance << " m (" << seconds
                << " s) -> " << file.string() << "\n";
      return rec.aborted ? 2 : 0;
    } else if (bench->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      const ResultTable table = runBenchmark(cfg, out, &std::cerr);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << "mixture  d_max     iLQG mean/std      DROC mean/std      ratio\n";
      for (const auto& r : table.rows) {
        std::printf("%-8s %-9.4g %.4f / %.4f    %.4f / %.4f    %.3f%s\n", r.mixture.c_str(),
                    r.d_max, r.ilqg.mean, r.ilqg.std, r.droc.mean, r.droc.std, r.ratio,
                    (r.droc.complete && r.ilqg.complete) ? "" : "  (incomplete)");
      }
      std::cout << "benchmark took " << seconds << " s\n";
    } else if (plots->parsed()) {
      const fs::path in_dir(input_dir);
      for (const auto& [name, truth] : cfg.mixtures) {
        const fs::path mix_dir = in_dir / ("mixture_" + name);
        if (!fs::exists(mix_dir / "runs.json")) continue;
        std::vector<MpcRecord> records;
        for (const auto& r : readJson(mix_dir / "runs.json")) records.push_back(recordFromJson(r));
        const auto ref = StateDependentReference::fromJson(readJson(mix_dir / "gp_models.json"));
        emitPlotData(records, truth, ref, out / ("mixture_" + name) / "plots");
        std::cout << "wrote plot data for mixture " << name << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
