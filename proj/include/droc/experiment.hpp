#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "droc/config.hpp"
#include "droc/droc_mpc.hpp"
#include "droc/kl_bound.hpp"
#include "droc/noise_learning.hpp"

namespace droc {

inline constexpr int kSummarySchemaVersion = 1;

/// Mean/std of final distances for one (mixture, mode) cell.
struct CellStats {
  std::vector<double> distances;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n − 1)
  bool complete = true;

  static CellStats from(std::span<const double> distances, bool complete = true);
};

struct MixtureResult {
  std::string mixture;
  double d_max = 0.0;
  CellStats droc;
  CellStats ilqg;
  double ratio = 0.0;  // mean droc / mean ilqg
};

struct ResultTable {
  std::vector<MixtureResult> rows;

  nlohmann::json toJson() const;
};

/// The learned model for one mixture: training data, fitted GPs and the horizon bound.
struct LearnedNoiseModel {
  TrainingSet training;
  StateDependentReference reference;
  HorizonBound bound;
};

/// Seeds derived from the root seed; every stage owns its own stream.
struct SeedPlan {
  std::uint64_t root = 0;

  std::uint64_t collection(std::size_t mixture) const;
  std::uint64_t gp(std::size_t mixture) const;
  std::uint64_t bound(std::size_t mixture) const;
  std::uint64_t run(std::size_t mixture, int index) const;
};

TrainingSet collectForConfig(const RunConfig& cfg, const MixtureNoise& mix, std::uint64_t seed);

LearnedNoiseModel learnNoiseModel(const RunConfig& cfg, const MixtureNoise& mix,
                                  std::uint64_t collection_seed, std::uint64_t gp_seed,
                                  std::uint64_t bound_seed);

/// One closed-loop run of the given mode on the car robot.
MpcRecord runCase(const RunConfig& cfg, const MixtureNoise& truth,
                  const StateDependentReference& reference, double d, ControllerMode mode,
                  std::uint64_t seed);

nlohmann::json recordToJson(const MpcRecord& rec);
MpcRecord recordFromJson(const nlohmann::json& j);

/// CSV with header t,x,y,theta,v,a,delta,theta_star; the last row has empty control columns.
void writeTrajectoryCsv(const MpcRecord& rec, const std::filesystem::path& path);

/**
 * Plot-ready files: one x-y path CSV per record, a 51×51 variance heatmap over
 * [0,5]² (per-component and mixture x/y variances plus the GP prediction) and,
 * per state dimension, the GP mean with 95% bands and the MLE training targets.
 */
void emitPlotData(std::span<const MpcRecord> records, const MixtureNoise& truth,
                  const StateDependentReference& reference, const std::filesystem::path& out_dir);

/**
 * Full study: for every mixture collect data, fit the GPs, estimate the horizon
 * bound, then run paired DROC/iLQG closed loops sharing noise streams. Writes
 * summary.json, table.csv and per-mixture artifacts under out_dir.
 */
ResultTable runBenchmark(const RunConfig& cfg, const std::filesystem::path& out_dir,
                         std::ostream* log = nullptr);

/// Writes text to path via a temporary file and rename.
void writeFileAtomically(const std::filesystem::path& path, const std::string& text);

std::string formatDouble(double v);

}  // namespace droc
