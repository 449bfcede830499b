#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "droc/cost_model.hpp"
#include "droc/dynamics.hpp"
#include "droc/noise_learning.hpp"
#include "droc/risk_ddp.hpp"
#include "droc/rng.hpp"

namespace droc {

/// Log-normal cross-entropy search over θ > 0.
struct CrossEntropyConfig {
  int population = 32;
  double elite_frac = 0.25;
  int max_gens = 15;
  double init_log_mean = std::log(0.1);
  double init_log_std = 2.0;
  double min_std = 0.05;
  double std_smoothing = 0.7;  // weight of the elite log-std in each refit

  int eliteCount() const;
  void validate() const;
};

struct CrossEntropyResult {
  double theta_star = 0.0;
  double objective = 0.0;
  int generations = 0;
  bool all_infeasible = false;  // three consecutive generations without a finite objective
  std::vector<double> elite_mean;  // mean elite objective after each generation
  std::vector<double> log_std;     // sampling log-std after each refit
};

/**
 * Minimizes objective(θ) over θ > 0. Each generation samples θ = exp(N(μ, σ²)),
 * keeps the best eliteCount() of the new population together with the previous
 * elites, and refits μ to their mean log θ and σ to a blend of their log-std and
 * the previous σ. Infinite objectives mark infeasible θ.
 * Returns the best θ evaluated across all generations.
 */
CrossEntropyResult crossEntropyMinimize(const std::function<double(double)>& objective,
                                        const CrossEntropyConfig& cfg, Rng& rng);

/// One receding-horizon subproblem.
struct DrocProblem {
  const PlantModel* model = nullptr;
  const QuadCost* cost = nullptr;
  NoiseCovarianceFn reference;
  StateVec x0;
  std::vector<ControlVec> u_init;
  SolverOptions solver;
};

/// R_θ(J) + d/θ.
struct DrocObjective {
  double entropic_term = 0.0;
  double penalty_term = 0.0;
  double total = 0.0;
  bool feasible = true;
};

struct DrocEvaluation {
  DrocObjective objective;
  InnerSolution solution;
};

/// Solves the inner problem at θ; θ outside the feasible set gives total = +∞.
DrocEvaluation drocObjective(double theta, const DrocProblem& problem, double d);

struct ThetaSearchResult {
  double theta_star = 0.0;
  AffinePolicy policy;
  DrocObjective objective;
  bool fell_back_to_ilqg = false;
  CrossEntropyResult ce;
};

/// Cross-entropy minimization of the DROC objective over θ; falls back to θ = 0 if all infeasible.
ThetaSearchResult crossEntropyTheta(const DrocProblem& problem, double d,
                                    const CrossEntropyConfig& cfg, Rng& rng);

enum class ControllerMode { kDroc, kIlqg };

std::string toString(ControllerMode mode);
ControllerMode controllerModeFromString(const std::string& s);

struct MpcRun {
  StateVec x0;
  int iterations = 22;
  int horizon = 10;
  std::uint64_t seed = 0;
  ControllerMode mode = ControllerMode::kDroc;
};

struct MpcRecord {
  ControllerMode mode = ControllerMode::kDroc;
  std::uint64_t seed = 0;
  std::vector<StateVec> states;      // iterations + 1
  std::vector<ControlVec> controls;  // iterations
  std::vector<double> theta_star;    // per iteration, 0 for iLQG
  double final_distance = 0.0;
  std::uint64_t noise_stream_hash = 0;
  int ilqg_fallbacks = 0;
  bool aborted = false;
  std::string error;
};

/// Noise stream of run `seed`; identical for both controller modes.
Rng noiseStream(std::uint64_t seed);

/**
 * Receding-horizon loop: optimize over the horizon (θ search for DROC, θ = 0 for
 * iLQG), apply the first control, step the plant with a true-noise draw, shift
 * the nominal controls and repeat.
 */
MpcRecord runMpc(const PlantModel& model, const QuadCost& cost, const MixtureNoise& truth,
                 const NoiseCovarianceFn& reference, double d, const MpcRun& run,
                 const CrossEntropyConfig& ce, const SolverOptions& solver);

}  // namespace droc
