#include "droc/droc_mpc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "droc/errors.hpp"

namespace droc {

int CrossEntropyConfig::eliteCount() const {
  return std::max(1, static_cast<int>(std::floor(elite_frac * population)));
}

void CrossEntropyConfig::validate() const {
  if (population < 8) throw InvalidArgument("cross-entropy population must be >= 8");
  if (!(elite_frac > 0.0 && elite_frac <= 0.5)) {
    throw InvalidArgument("cross-entropy elite fraction must be in (0, 0.5]");
  }
  if (max_gens < 1 || !(init_log_std > 0.0) || !(min_std > 0.0)) {
    throw InvalidArgument("cross-entropy generations and spreads must be positive");
  }
  if (!(std_smoothing > 0.0 && std_smoothing <= 1.0)) {
    throw InvalidArgument("cross-entropy std smoothing must be in (0, 1]");
  }
}

namespace {

struct Candidate {
  double theta;
  double value;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.theta < b.theta;
}

}  // namespace

CrossEntropyResult crossEntropyMinimize(const std::function<double(double)>& objective,
                                        const CrossEntropyConfig& cfg, Rng& rng) {
  cfg.validate();
  const auto n_elite = static_cast<std::size_t>(cfg.eliteCount());
  const double inf = std::numeric_limits<double>::infinity();

  CrossEntropyResult out;
  Candidate best{0.0, inf};
  std::vector<Candidate> elites;
  double mu = cfg.init_log_mean;
  double sigma = cfg.init_log_std;
  int infeasible_streak = 0;

  for (int gen = 0; gen < cfg.max_gens; ++gen) {
    std::vector<Candidate> pool = elites;
    bool any_finite = false;
    for (int i = 0; i < cfg.population; ++i) {
      const double theta = std::exp(mu + sigma * rng.normal());
      double value = objective(theta);
      if (std::isnan(value)) value = inf;
      any_finite = any_finite || std::isfinite(value);
      const Candidate c{theta, value};
      if (better(c, best)) best = c;
      pool.push_back(c);
    }
    ++out.generations;

    infeasible_streak = any_finite ? 0 : infeasible_streak + 1;
    if (infeasible_streak >= 3) {
      out.all_infeasible = true;
      break;
    }

    std::sort(pool.begin(), pool.end(), better);
    pool.resize(std::min(pool.size(), n_elite));
    elites = std::move(pool);

    double mean_obj = 0.0;
    double log_mean = 0.0;
    for (const auto& e : elites) {
      mean_obj += e.value;
      log_mean += std::log(e.theta);
    }
    mean_obj /= static_cast<double>(elites.size());
    log_mean /= static_cast<double>(elites.size());
    double log_var = 0.0;
    for (const auto& e : elites) {
      const double dl = std::log(e.theta) - log_mean;
      log_var += dl * dl;
    }
    log_var /= static_cast<double>(elites.size());
    mu = log_mean;
    sigma = cfg.std_smoothing * std::sqrt(log_var) + (1.0 - cfg.std_smoothing) * sigma;
    out.elite_mean.push_back(mean_obj);
    out.log_std.push_back(sigma);
    if (sigma < cfg.min_std && std::isfinite(best.value)) {
      break;
    }
  }
  out.theta_star = best.theta;
  out.objective = best.value;
  return out;
}

DrocEvaluation drocObjective(double theta, const DrocProblem& problem, double d) {
  if (!(theta > 0.0)) throw InvalidArgument("drocObjective: theta must be positive");
  if (d < 0.0) throw InvalidArgument("drocObjective: d must be non-negative");
  DrocEvaluation ev;
  ev.objective.penalty_term = d / theta;
  try {
    ev.solution = solveInner(*problem.model, *problem.cost, problem.reference, theta, problem.x0,
                             problem.u_init, problem.solver);
    ev.objective.entropic_term = ev.solution.entropic_risk;
    ev.objective.total = ev.objective.entropic_term + ev.objective.penalty_term;
    if (!std::isfinite(ev.objective.total)) {
      ev.objective.feasible = false;
      ev.objective.total = std::numeric_limits<double>::infinity();
    }
  } catch (const RiskInfeasible&) {
    ev.objective.feasible = false;
    ev.objective.entropic_term = std::numeric_limits<double>::infinity();
    ev.objective.total = std::numeric_limits<double>::infinity();
  }
  return ev;
}

ThetaSearchResult crossEntropyTheta(const DrocProblem& problem, double d,
                                    const CrossEntropyConfig& cfg, Rng& rng) {
  ThetaSearchResult out;
  double best_total = std::numeric_limits<double>::infinity();
  double best_theta = std::numeric_limits<double>::infinity();
  auto objective = [&](double theta) {
    DrocEvaluation ev;
    try {
      ev = drocObjective(theta, problem, d);
    } catch (const Error&) {
      // A failed inner solve (singular H, non-finite rollout) is treated like an infeasible θ.
      return std::numeric_limits<double>::infinity();
    }
    const double total = ev.objective.total;
    if (total < best_total || (total == best_total && theta < best_theta)) {
      best_total = total;
      best_theta = theta;
      out.policy = std::move(ev.solution.policy);
      out.objective = ev.objective;
    }
    return total;
  };
  out.ce = crossEntropyMinimize(objective, cfg, rng);

  if (!std::isfinite(best_total)) {
    out.fell_back_to_ilqg = true;
    out.theta_star = 0.0;
    const InnerSolution sol = solveInner(*problem.model, *problem.cost, problem.reference, 0.0,
                                         problem.x0, problem.u_init, problem.solver);
    out.policy = sol.policy;
    out.objective = {sol.entropic_risk, 0.0, sol.entropic_risk, true};
  } else {
    out.theta_star = best_theta;
  }
  return out;
}

std::string toString(ControllerMode mode) {
  return mode == ControllerMode::kDroc ? "droc" : "ilqg";
}

ControllerMode controllerModeFromString(const std::string& s) {
  if (s == "droc") return ControllerMode::kDroc;
  if (s == "ilqg") return ControllerMode::kIlqg;
  throw InvalidArgument("unknown controller mode '" + s + "' (expected droc or ilqg)");
}

Rng noiseStream(std::uint64_t seed) { return Rng::stream(seed, {0}); }

MpcRecord runMpc(const PlantModel& model, const QuadCost& cost, const MixtureNoise& truth,
                 const NoiseCovarianceFn& reference, double d, const MpcRun& run,
                 const CrossEntropyConfig& ce, const SolverOptions& solver) {
  if (run.iterations < 1 || run.horizon < 1) {
    throw InvalidArgument("runMpc: iterations and horizon must be positive");
  }
  if (cost.horizon != run.horizon) {
    throw DimensionError("runMpc: cost horizon differs from the MPC horizon");
  }
  truth.validate();

  MpcRecord rec;
  rec.mode = run.mode;
  rec.seed = run.seed;
  rec.states.push_back(run.x0);

  Rng noise_rng = noiseStream(run.seed);
  DrocProblem problem;
  problem.model = &model;
  problem.cost = &cost;
  problem.reference = reference;
  problem.solver = solver;
  problem.u_init.assign(static_cast<std::size_t>(run.horizon),
                        ControlVec::Zero(model.controlDim()));

  try {
    for (int it = 0; it < run.iterations; ++it) {
      problem.x0 = rec.states.back();
      AffinePolicy policy;
      double theta = 0.0;
      if (run.mode == ControllerMode::kDroc) {
        Rng ce_rng = Rng::stream(run.seed, {1, static_cast<std::uint64_t>(it)});
        ThetaSearchResult search = crossEntropyTheta(problem, d, ce, ce_rng);
        if (search.fell_back_to_ilqg) ++rec.ilqg_fallbacks;
        theta = search.theta_star;
        policy = std::move(search.policy);
      } else {
        policy = solveInner(model, cost, reference, 0.0, problem.x0, problem.u_init, solver).policy;
      }

      const ControlVec u = policy.u_nom.front();
      const NoiseVec w = sampleTrueNoise(truth, problem.x0, noise_rng);
      rec.states.push_back(step(model, problem.x0, u, w));
      rec.controls.push_back(u);
      rec.theta_star.push_back(theta);

      // Shift the plan by one step and repeat the last control.
      std::vector<ControlVec> shifted(policy.u_nom.begin() + 1, policy.u_nom.end());
      shifted.push_back(policy.u_nom.back());
      problem.u_init = std::move(shifted);
    }
  } catch (const Error& e) {
    rec.aborted = true;
    rec.error = e.what();
  }
  const StateVec& xf = rec.states.back();
  rec.final_distance = std::hypot(xf(0), xf(1));
  rec.noise_stream_hash = noise_rng.drawHash();
  return rec;
}

}  // namespace droc
