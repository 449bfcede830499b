#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "droc/cost_model.hpp"
#include "droc/droc_mpc.hpp"
#include "droc/gaussian_process.hpp"
#include "droc/kl_bound.hpp"
#include "droc/noise_learning.hpp"
#include "droc/risk_ddp.hpp"

namespace droc {

/// Everything a collection, fitting, bounding or control run needs. Unset JSON keys keep defaults.
struct RunConfig {
  // plant
  double wheelbase = 0.3;
  double dt = 0.1;

  // cost weights (diagonals)
  Eigen::VectorXd q_diag;
  Eigen::VectorXd r_diag;
  Eigen::VectorXd qf_diag;

  SolverOptions solver;
  CrossEntropyConfig cross_entropy;

  // data collection
  GridSpec grid;
  int realizations = 1000;  // N
  Eigen::VectorXd collection_control;

  GpFitOptions gp;
  double min_variance = StateDependentReference::kDefaultMinVariance;
  KnnConfig knn;

  // receding horizon
  int horizon = 10;
  int iterations = 22;
  Eigen::VectorXd x0;

  // benchmark
  int runs_per_case = 15;
  std::uint64_t root_seed = 0;
  std::vector<std::pair<std::string, MixtureNoise>> mixtures;

  QuadCost makeCost() const;
  const MixtureNoise& mixture(const std::string& name) const;
  void validate() const;

  nlohmann::json toJson() const;
};

RunConfig defaultConfig();

/// Defaults overridden by the keys present in j.
RunConfig configFromJson(const nlohmann::json& j);
RunConfig loadConfig(const std::filesystem::path& path);

Eigen::VectorXd vectorFromJson(const nlohmann::json& j);
nlohmann::json vectorToJson(const Eigen::VectorXd& v);

}  // namespace droc
