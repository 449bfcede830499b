#include "droc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "droc/errors.hpp"
#include "droc/training_set_io.hpp"

namespace droc {

namespace fs = std::filesystem;

std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void writeFileAtomically(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << text;
    if (!out) throw InvalidArgument("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

CellStats CellStats::from(std::span<const double> distances, bool complete) {
  CellStats s;
  s.distances.assign(distances.begin(), distances.end());
  s.complete = complete;
  if (distances.empty()) return s;
  const double n = static_cast<double>(distances.size());
  s.mean = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
  if (distances.size() > 1) {
    double ss = 0.0;
    for (double d : distances) ss += (d - s.mean) * (d - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

namespace {

nlohmann::json cellToJson(const CellStats& c) {
  return {{"mean", c.mean}, {"std", c.std}, {"distances", c.distances}, {"complete", c.complete}};
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t derive(std::uint64_t root, std::initializer_list<std::uint64_t> ids) {
  return Rng::stream(root, ids).engine()();
}

}  // namespace

nlohmann::json ResultTable::toJson() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"mixture", r.mixture},
                         {"d_max", r.d_max},
                         {"droc", cellToJson(r.droc)},
                         {"ilqg", cellToJson(r.ilqg)},
                         {"ratio", r.ratio}});
  }
  return rows_json;
}

std::uint64_t SeedPlan::collection(std::size_t mixture) const { return derive(root, {10, mixture}); }
std::uint64_t SeedPlan::gp(std::size_t mixture) const { return derive(root, {11, mixture}); }
std::uint64_t SeedPlan::bound(std::size_t mixture) const { return derive(root, {12, mixture}); }
std::uint64_t SeedPlan::run(std::size_t mixture, int index) const {
  return derive(root, {13, mixture, static_cast<std::uint64_t>(index)});
}

TrainingSet collectForConfig(const RunConfig& cfg, const MixtureNoise& mix, std::uint64_t seed) {
  const KinematicBicycle car(cfg.wheelbase, cfg.dt);
  Rng rng(seed);
  return collectTrainingData(car, mix, cfg.grid, cfg.realizations, cfg.collection_control, rng,
                             seed);
}

LearnedNoiseModel learnNoiseModel(const RunConfig& cfg, const MixtureNoise& mix,
                                  std::uint64_t collection_seed, std::uint64_t gp_seed,
                                  std::uint64_t bound_seed) {
  LearnedNoiseModel model;
  model.training = collectForConfig(cfg, mix, collection_seed);
  GpFitOptions gp = cfg.gp;
  gp.seed = gp_seed;
  model.reference = fitStateDependent(model.training, gp, cfg.min_variance);
  model.bound = horizonBound(model.training, cfg.horizon, cfg.knn, bound_seed);
  return model;
}

MpcRecord runCase(const RunConfig& cfg, const MixtureNoise& truth,
                  const StateDependentReference& reference, double d, ControllerMode mode,
                  std::uint64_t seed) {
  const KinematicBicycle car(cfg.wheelbase, cfg.dt);
  const QuadCost cost = cfg.makeCost();
  MpcRun run;
  run.x0 = cfg.x0;
  run.iterations = cfg.iterations;
  run.horizon = cfg.horizon;
  run.seed = seed;
  run.mode = mode;
  const NoiseCovarianceFn ref = [&reference](const StateVec& x) {
    return reference.covariance(x);
  };
  return runMpc(car, cost, truth, ref, d, run, cfg.cross_entropy, cfg.solver);
}

nlohmann::json recordToJson(const MpcRecord& rec) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& x : rec.states) states.push_back(vectorToJson(x));
  nlohmann::json controls = nlohmann::json::array();
  for (const auto& u : rec.controls) controls.push_back(vectorToJson(u));
  return {{"mode", toString(rec.mode)},
          {"seed", rec.seed},
          {"states", states},
          {"controls", controls},
          {"theta_star", rec.theta_star},
          {"final_distance", rec.final_distance},
          {"noise_stream_hash", hex(rec.noise_stream_hash)},
          {"ilqg_fallbacks", rec.ilqg_fallbacks},
          {"aborted", rec.aborted},
          {"error", rec.error}};
}

MpcRecord recordFromJson(const nlohmann::json& j) {
  MpcRecord rec;
  rec.mode = controllerModeFromString(j.at("mode").get<std::string>());
  rec.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& x : j.at("states")) rec.states.push_back(vectorFromJson(x));
  for (const auto& u : j.at("controls")) rec.controls.push_back(vectorFromJson(u));
  rec.theta_star = j.at("theta_star").get<std::vector<double>>();
  rec.final_distance = j.at("final_distance").get<double>();
  rec.noise_stream_hash = std::stoull(j.at("noise_stream_hash").get<std::string>(), nullptr, 16);
  rec.ilqg_fallbacks = j.value("ilqg_fallbacks", 0);
  rec.aborted = j.value("aborted", false);
  rec.error = j.value("error", std::string());
  return rec;
}

void writeTrajectoryCsv(const MpcRecord& rec, const fs::path& path) {
  std::ostringstream out;
  out << "t,x,y,theta,v,a,delta,theta_star\n";
  for (std::size_t t = 0; t < rec.states.size(); ++t) {
    const auto& x = rec.states[t];
    out << t;
    for (Eigen::Index i = 0; i < x.size(); ++i) out << ',' << formatDouble(x(i));
    if (t < rec.controls.size()) {
      out << ',' << formatDouble(rec.controls[t](0)) << ',' << formatDouble(rec.controls[t](1))
          << ',' << formatDouble(rec.theta_star[t]);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
  writeFileAtomically(path, out.str());
}

void emitPlotData(std::span<const MpcRecord> records, const MixtureNoise& truth,
                  const StateDependentReference& reference, const fs::path& out_dir) {
  fs::create_directories(out_dir / "paths");
  for (std::size_t r = 0; r < records.size(); ++r) {
    const MpcRecord& rec = records[r];
    std::ostringstream out;
    out << "t,x,y\n";
    for (std::size_t t = 0; t < rec.states.size(); ++t) {
      out << t << ',' << formatDouble(rec.states[t](0)) << ',' << formatDouble(rec.states[t](1))
          << '\n';
    }
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%02zu.csv", toString(rec.mode).c_str(), r);
    writeFileAtomically(out_dir / "paths" / name, out.str());
  }

  {
    std::ostringstream out;
    out << "x,y";
    for (std::size_t i = 0; i < truth.components.size(); ++i) {
      out << ",var_x_c" << i + 1 << ",var_y_c" << i + 1;
    }
    out << ",var_x_mixture,var_y_mixture,var_x_gp,var_y_gp\n";
    for (int ix = 0; ix <= 50; ++ix) {
      for (int iy = 0; iy <= 50; ++iy) {
        StateVec x = StateVec::Zero(4);
        x(0) = 0.1 * ix;
        x(1) = 0.1 * iy;
        out << formatDouble(x(0)) << ',' << formatDouble(x(1));
        for (const auto& c : truth.components) {
          const Eigen::VectorXd v = c.variance(x);
          out << ',' << formatDouble(v(0)) << ',' << formatDouble(v(1));
        }
        const Eigen::VectorXd vm = truth.variance(x);
        const Eigen::VectorXd vg = reference.covariance(x);
        out << ',' << formatDouble(vm(0)) << ',' << formatDouble(vm(1)) << ','
            << formatDouble(vg(0)) << ',' << formatDouble(vg(1)) << '\n';
      }
    }
    writeFileAtomically(out_dir / "variance_heatmap.csv", out.str());
  }

  static const char* kDimNames[] = {"x", "y", "theta", "v"};
  const auto& gps = reference.gps();
  for (std::size_t i = 0; i < gps.size(); ++i) {
    const auto& gp = gps[i];
    const auto [lo_it, hi_it] = std::minmax_element(gp.inputs().begin(), gp.inputs().end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    std::ostringstream out;
    out << "input,mean,std,lower,upper\n";
    constexpr int kPoints = 201;
    for (int p = 0; p < kPoints; ++p) {
      const double a = lo + (hi - lo) * p / (kPoints - 1.0);
      const double mean = gp.predictMean(a);
      const double sd = std::sqrt(gp.predictVariance(a));
      out << formatDouble(a) << ',' << formatDouble(mean) << ',' << formatDouble(sd) << ','
          << formatDouble(mean - 1.96 * sd) << ',' << formatDouble(mean + 1.96 * sd) << '\n';
    }
    const std::string dim = i < 4 ? kDimNames[i] : std::to_string(i);
    writeFileAtomically(out_dir / ("gp_fit_" + dim + ".csv"), out.str());

    std::ostringstream pts;
    pts << "input,mle_variance\n";
    for (std::size_t j = 0; j < gp.inputs().size(); ++j) {
      pts << formatDouble(gp.inputs()[j]) << ',' << formatDouble(gp.targets()[j]) << '\n';
    }
    writeFileAtomically(out_dir / ("gp_targets_" + dim + ".csv"), pts.str());
  }
}

ResultTable runBenchmark(const RunConfig& cfg, const fs::path& out_dir, std::ostream* log) {
  cfg.validate();
  fs::create_directories(out_dir);
  const SeedPlan seeds{cfg.root_seed};
  ResultTable table;

  for (std::size_t mi = 0; mi < cfg.mixtures.size(); ++mi) {
    const auto& [name, mix] = cfg.mixtures[mi];
    const fs::path mix_dir = out_dir / ("mixture_" + name);
    if (log) *log << "[" << name << "] collecting and fitting noise model\n" << std::flush;
    const LearnedNoiseModel learned =
        learnNoiseModel(cfg, mix, seeds.collection(mi), seeds.gp(mi), seeds.bound(mi));
    writeFileAtomically(mix_dir / "gp_models.json", learned.reference.toJson().dump(2) + "\n");
    const nlohmann::json bound_json = {{"d_max", learned.bound.d_max},
                                       {"per_window", learned.bound.per_window},
                                       {"degenerate", learned.bound.degenerate},
                                       {"k", cfg.knn.k},
                                       {"M", cfg.knn.M},
                                       {"n", cfg.horizon},
                                       {"seed", seeds.bound(mi)}};
    writeFileAtomically(mix_dir / "bound.json", bound_json.dump(2) + "\n");
    const double d = learned.bound.d_max;
    if (log) *log << "[" << name << "] d_max = " << d << "\n" << std::flush;

    std::vector<MpcRecord> records;
    std::vector<double> droc_dist;
    std::vector<double> ilqg_dist;
    bool droc_complete = true;
    bool ilqg_complete = true;
    nlohmann::json runs = nlohmann::json::array();
    for (int i = 0; i < cfg.runs_per_case; ++i) {
      const std::uint64_t seed = seeds.run(mi, i);
      for (ControllerMode mode : {ControllerMode::kDroc, ControllerMode::kIlqg}) {
        MpcRecord rec = runCase(cfg, mix, learned.reference, d, mode, seed);
        char file[64];
        std::snprintf(file, sizeof(file), "%s_%02d.csv", toString(mode).c_str(), i);
        writeTrajectoryCsv(rec, mix_dir / "trajectories" / file);
        if (mode == ControllerMode::kDroc) {
          droc_dist.push_back(rec.final_distance);
          droc_complete = droc_complete && !rec.aborted;
        } else {
          ilqg_dist.push_back(rec.final_distance);
          ilqg_complete = ilqg_complete && !rec.aborted;
        }
        if (log) {
          *log << "[" << name << "] run " << i << " " << toString(mode)
               << " final distance " << rec.final_distance << (rec.aborted ? " (aborted)" : "")
               << "\n" << std::flush;
        }
        runs.push_back(recordToJson(rec));
        records.push_back(std::move(rec));
      }
    }
    writeFileAtomically(mix_dir / "runs.json", runs.dump() + "\n");
    emitPlotData(records, mix, learned.reference, mix_dir / "plots");

    MixtureResult row;
    row.mixture = name;
    row.d_max = d;
    row.droc = CellStats::from(droc_dist, droc_complete);
    row.ilqg = CellStats::from(ilqg_dist, ilqg_complete);
    row.ratio = row.ilqg.mean > 0.0 ? row.droc.mean / row.ilqg.mean
                                    : std::numeric_limits<double>::quiet_NaN();
    table.rows.push_back(std::move(row));
  }

  std::ostringstream csv;
  csv << "mixture,mode,mean,std,runs,complete\n";
  for (const auto& r : table.rows) {
    for (const auto& [mode, cell] : {std::pair{"ilqg", &r.ilqg}, std::pair{"droc", &r.droc}}) {
      csv << r.mixture << ',' << mode << ',' << formatDouble(cell->mean) << ','
          << formatDouble(cell->std) << ',' << cell->distances.size() << ','
          << (cell->complete ? "true" : "false") << '\n';
    }
  }
  writeFileAtomically(out_dir / "table.csv", csv.str());

  const nlohmann::json summary = {{"schema_version", kSummarySchemaVersion},
                                  {"root_seed", cfg.root_seed},
                                  {"config", cfg.toJson()},
                                  {"table", table.toJson()}};
  writeFileAtomically(out_dir / "summary.json", summary.dump(2) + "\n");
  return table;
}

}  // namespace droc
