#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "droc/config.hpp"
#include "droc/droc_mpc.hpp"
#include "droc/dynamics.hpp"
#include "droc/errors.hpp"

using namespace droc;

namespace {

CrossEntropyConfig tightConfig() {
  CrossEntropyConfig cfg;
  cfg.population = 64;
  cfg.max_gens = 40;
  cfg.min_std = 1e-4;
  return cfg;
}

QuadCost carCost(int horizon) {
  return QuadCost::diagonal(Eigen::Vector4d(1, 1, 0.1, 0.1), Eigen::Vector2d(0.1, 0.1),
                            Eigen::Vector4d(10, 10, 1, 1), horizon);
}

MixtureNoise constantNoise(double var) {
  MixtureComponent c;
  c.base = Eigen::Vector4d(var, var, var / 10, var);
  c.amplitude = Eigen::Vector4d::Zero();
  return {{1.0}, {c}};
}

struct ScalarFixture {
  LinearPlant plant{Eigen::MatrixXd::Constant(1, 1, 1.1), Eigen::MatrixXd::Constant(1, 1, 0.5)};
  QuadCost cost{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::MatrixXd::Constant(1, 1, 0.2),
                Eigen::MatrixXd::Constant(1, 1, 2.0), 3};
  DrocProblem problem() const {
    DrocProblem p;
    p.model = &plant;
    p.cost = &cost;
    p.reference = [](const StateVec&) { return Eigen::VectorXd::Constant(1, 0.3); };
    p.x0 = Eigen::VectorXd::Constant(1, 1.0);
    p.u_init.assign(3, Eigen::VectorXd::Zero(1));
    return p;
  }
};

}  // namespace

TEST_CASE("cross-entropy recovers the minimizer of (log theta - log 2)^2") {
  CrossEntropyConfig cfg;
  cfg.max_gens = 20;
  Rng rng(1);
  const auto res = crossEntropyMinimize(
      [](double t) { return std::pow(std::log(t) - std::log(2.0), 2); }, cfg, rng);
  CHECK(std::abs(res.theta_star - 2.0) <= 0.01 * 2.0);
  CHECK(res.generations <= 20);
  for (std::size_t i = 1; i < res.elite_mean.size(); ++i) CHECK(res.elite_mean[i] <= res.elite_mean[i - 1]);
}

TEST_CASE("cross-entropy is deterministic for a fixed seed") {
  auto f = [](double t) { return std::pow(t - 0.3, 2) + 0.1 / t; };
  Rng a(44), b(44);
  const auto ra = crossEntropyMinimize(f, {}, a);
  const auto rb = crossEntropyMinimize(f, {}, b);
  CHECK(ra.theta_star == rb.theta_star);
  CHECK(ra.objective == rb.objective);
}

TEST_CASE("cross-entropy treats infinite objectives as infeasible") {
  Rng rng(2);
  const auto capped = crossEntropyMinimize(
      [](double t) { return t > 1.0 ? std::numeric_limits<double>::infinity() : -t; }, tightConfig(), rng);
  CHECK(capped.theta_star <= 1.0);
  CHECK(capped.theta_star > 0.9);

  Rng rng2(3);
  const auto none = crossEntropyMinimize([](double) { return std::numeric_limits<double>::infinity(); },
                                         CrossEntropyConfig{}, rng2);
  CHECK(none.all_infeasible);
  CHECK(none.generations == 3);
  CHECK(std::isinf(none.objective));
}

TEST_CASE("larger ambiguity radius never lowers the selected theta") {
  // θ² stands in for an increasing entropic term; the minimizer is (d/2)^(1/3).
  double previous = 0.0;
  for (double d : {0.01, 0.1, 1.0, 10.0}) {
    Rng rng(7);
    const auto res = crossEntropyMinimize([d](double t) { return t * t + d / t; }, tightConfig(), rng);
    CHECK(res.theta_star >= previous);
    CHECK(res.theta_star == doctest::Approx(std::cbrt(d / 2.0)).epsilon(0.01));
    previous = res.theta_star;
  }
}

TEST_CASE("cross-entropy configuration validation") {
  CrossEntropyConfig cfg;
  cfg.population = 4;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.elite_frac = 0.7;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.max_gens = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  CHECK(CrossEntropyConfig{}.eliteCount() == 8);
}

TEST_CASE("DROC objective: decomposition, infeasibility and the risk-neutral limit") {
  const ScalarFixture fx;
  const DrocProblem p = fx.problem();
  const auto ev = drocObjective(0.1, p, 0.5);
  CHECK(ev.objective.feasible);
  CHECK(ev.objective.penalty_term == doctest::Approx(5.0));
  CHECK(ev.objective.total == ev.objective.entropic_term + ev.objective.penalty_term);

  const auto inf = drocObjective(100.0, p, 0.5);
  CHECK_FALSE(inf.objective.feasible);
  CHECK(std::isinf(inf.objective.total));

  const auto neutral = solveInner(fx.plant, fx.cost, p.reference, 0.0, p.x0, p.u_init);
  const auto tiny = drocObjective(1e-9, p, 0.0);
  CHECK(tiny.objective.penalty_term == 0.0);
  CHECK(tiny.objective.total == doctest::Approx(neutral.entropic_risk).epsilon(1e-6));

  CHECK_THROWS_AS(drocObjective(0.0, p, 0.5), InvalidArgument);
  CHECK_THROWS_AS(drocObjective(0.1, p, -1.0), InvalidArgument);
}

TEST_CASE("theta search: zero radius drifts low, positive radius selects a larger theta") {
  const ScalarFixture fx;
  const DrocProblem p = fx.problem();
  CrossEntropyConfig cfg;
  Rng a(5);
  const auto zero = crossEntropyTheta(p, 0.0, cfg, a);
  CHECK_FALSE(zero.fell_back_to_ilqg);
  CHECK(zero.theta_star < std::exp(cfg.init_log_mean));
  Rng b(5);
  const auto positive = crossEntropyTheta(p, 0.5, cfg, b);
  CHECK(positive.theta_star > zero.theta_star);
  CHECK(positive.policy.horizon() == 3);
}

TEST_CASE("theta search falls back to iLQG when every theta is infeasible") {
  const ScalarFixture fx;
  DrocProblem p = fx.problem();
  p.reference = [](const StateVec&) { return Eigen::VectorXd::Constant(1, 1e6); };
  CrossEntropyConfig cfg;
  cfg.init_log_mean = std::log(10.0);
  cfg.init_log_std = 0.1;
  Rng rng(1);
  const auto res = crossEntropyTheta(p, 1.0, cfg, rng);
  CHECK(res.fell_back_to_ilqg);
  CHECK(res.theta_star == 0.0);
  CHECK(res.ce.all_infeasible);
  CHECK(res.policy.horizon() == 3);
}

TEST_CASE("receding horizon without noise reaches the origin in both modes") {
  const KinematicBicycle car;
  const QuadCost cost = defaultConfig().makeCost();
  CrossEntropyConfig ce;
  ce.population = 8;
  ce.max_gens = 3;
  MpcRun run;
  run.x0 = Eigen::Vector4d(5.0, 5.0, -0.75 * std::numbers::pi, 0.0);
  for (auto mode : {ControllerMode::kIlqg, ControllerMode::kDroc}) {
    run.mode = mode;
    const auto rec = runMpc(car, cost, constantNoise(0.0), zeroNoise(4), 1.0, run, ce, {});
    CHECK_FALSE(rec.aborted);
    CHECK(rec.states.size() == 23);
    CHECK(rec.controls.size() == 22);
    CHECK(rec.final_distance < 0.05);
  }
}

TEST_CASE("paired runs share the noise stream and iLQG runs are reproducible") {
  const KinematicBicycle car;
  const QuadCost cost = carCost(5);
  const auto truth = constantNoise(1e-3);
  const NoiseCovarianceFn ref = [](const StateVec&) { return Eigen::Vector4d(1e-3, 1e-3, 1e-4, 1e-3).eval(); };
  CrossEntropyConfig ce;
  ce.population = 8;
  ce.max_gens = 2;
  MpcRun run;
  run.x0 = Eigen::Vector4d(2.0, 1.0, 0.0, 0.0);
  run.iterations = 6;
  run.horizon = 5;
  run.seed = 31;
  run.mode = ControllerMode::kIlqg;
  const auto a = runMpc(car, cost, truth, ref, 1.0, run, ce, {});
  const auto b = runMpc(car, cost, truth, ref, 1.0, run, ce, {});
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t t = 0; t < a.states.size(); ++t) CHECK(a.states[t] == b.states[t]);
  CHECK(a.final_distance == b.final_distance);
  for (double t : a.theta_star) CHECK(t == 0.0);

  run.mode = ControllerMode::kDroc;
  const auto c = runMpc(car, cost, truth, ref, 1.0, run, ce, {});
  CHECK(c.noise_stream_hash == a.noise_stream_hash);
  for (double t : c.theta_star) CHECK(t > 0.0);

  run.horizon = 4;
  CHECK_THROWS_AS(runMpc(car, cost, truth, ref, 1.0, run, ce, {}), DimensionError);
  run.horizon = 5;
  run.iterations = 0;
  CHECK_THROWS_AS(runMpc(car, cost, truth, ref, 1.0, run, ce, {}), InvalidArgument);
}

TEST_CASE("controller mode names") {
  CHECK((controllerModeFromString("droc") == ControllerMode::kDroc));
  CHECK((controllerModeFromString("ilqg") == ControllerMode::kIlqg));
  const std::string name = droc::toString(ControllerMode::kIlqg);
  CHECK(name == "ilqg");
  CHECK_THROWS_AS(controllerModeFromString("lqr"), InvalidArgument);
}
