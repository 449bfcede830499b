#include "droc/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "droc/errors.hpp"
#include "droc/training_set_io.hpp"

namespace droc {

namespace {

constexpr double kYawVariance = 1.3e-4;    // rad²
constexpr double kSpeedVariance = 2.2e-3;  // (m/s)²

MixtureComponent bumpComponent(double base_xy, double amp_xy) {
  MixtureComponent c;
  c.base = Eigen::Vector4d(base_xy, base_xy, kYawVariance, kSpeedVariance);
  c.amplitude = Eigen::Vector4d(amp_xy, amp_xy, 0.0, 0.0);
  return c;
}

MixtureNoise makeMixture(std::vector<double> weights,
                         std::initializer_list<std::pair<double, double>> comps) {
  MixtureNoise mix;
  mix.weights = std::move(weights);
  for (const auto& [base, amp] : comps) mix.components.push_back(bumpComponent(base, amp));
  return mix;
}

nlohmann::json mixtureToJson(const MixtureNoise& mix) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : mix.components) {
    comps.push_back({{"base", vectorToJson(c.base)},
                     {"amplitude", vectorToJson(c.amplitude)},
                     {"center", {c.center(0), c.center(1)}},
                     {"width", c.width}});
  }
  return {{"weights", mix.weights}, {"components", comps}};
}

MixtureNoise mixtureFromJson(const nlohmann::json& j) {
  MixtureNoise mix;
  mix.weights = j.at("weights").get<std::vector<double>>();
  for (const auto& c : j.at("components")) {
    MixtureComponent comp;
    comp.base = vectorFromJson(c.at("base"));
    comp.amplitude = vectorFromJson(c.at("amplitude"));
    if (c.contains("center")) {
      const auto center = c.at("center").get<std::vector<double>>();
      if (center.size() != 2) throw InvalidArgument("mixture center must have 2 entries");
      comp.center = Eigen::Vector2d(center[0], center[1]);
    }
    comp.width = c.value("width", comp.width);
    mix.components.push_back(std::move(comp));
  }
  mix.validate();
  return mix;
}

}  // namespace

Eigen::VectorXd vectorFromJson(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json vectorToJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

RunConfig defaultConfig() {
  RunConfig c;
  c.q_diag = Eigen::Vector4d(1.0, 1.0, 0.0, 0.3);
  c.r_diag = Eigen::Vector2d(0.05, 1.0);
  c.qf_diag = Eigen::Vector4d(100.0, 100.0, 0.0, 10.0);
  c.collection_control = Eigen::Vector2d::Zero();
  c.grid.axes = {{0.0, 5.0, 10}, {0.0, 5.0, 10}, {-std::numbers::pi, std::numbers::pi, 5},
                 {0.0, 4.0, 2}};
  c.x0 = Eigen::Vector4d(5.0, 5.0, -0.75 * std::numbers::pi, 0.0);
  c.mixtures = {
      {"a", makeMixture({0.5, 0.5}, {{2e-3, 1e-2}, {6e-3, 4e-2}})},
      {"b", makeMixture({0.6, 0.3, 0.1}, {{1.5e-3, 8e-3}, {5e-3, 3e-2}, {1.2e-2, 8e-2}})},
      {"c", makeMixture({0.3, 0.3, 0.2, 0.2},
                        {{1.5e-3, 6e-3}, {3e-3, 1.5e-2}, {6e-3, 3e-2}, {1e-2, 6e-2}})},
  };
  return c;
}

QuadCost RunConfig::makeCost() const { return QuadCost::diagonal(q_diag, r_diag, qf_diag, horizon); }

const MixtureNoise& RunConfig::mixture(const std::string& name) const {
  for (const auto& [n, m] : mixtures) {
    if (n == name) return m;
  }
  throw InvalidArgument("no mixture named '" + name + "' in the configuration");
}

void RunConfig::validate() const {
  if (!(wheelbase > 0.0) || !(dt > 0.0)) throw InvalidArgument("plant: L and dt must be positive");
  if (q_diag.size() != 4 || qf_diag.size() != 4 || r_diag.size() != 2) {
    throw DimensionError("cost diagonals must have 4 (state) and 2 (control) entries");
  }
  makeCost();
  cross_entropy.validate();
  if (grid.axes.size() != 4) throw DimensionError("grid needs one axis per state dimension");
  if (realizations < 2) throw InvalidArgument("collection needs N >= 2 realizations");
  if (collection_control.size() != 2) throw DimensionError("collection control needs 2 entries");
  if (knn.k < 1 || knn.M < knn.k) throw InvalidArgument("kNN needs 1 <= k <= M");
  if (horizon < 1 || iterations < 1 || runs_per_case < 1) {
    throw InvalidArgument("horizon, iterations and runs_per_case must be positive");
  }
  if (x0.size() != 4) throw DimensionError("x0 needs 4 entries");
  if (solver.max_iters < 1 || !(solver.tol > 0.0)) throw InvalidArgument("invalid solver options");
  for (const auto& [name, mix] : mixtures) mix.validate();
}

nlohmann::json RunConfig::toJson() const {
  nlohmann::json mixes = nlohmann::json::object();
  nlohmann::json order = nlohmann::json::array();
  for (const auto& [name, mix] : mixtures) {
    mixes[name] = mixtureToJson(mix);
    order.push_back(name);
  }
  return {
      {"plant", {{"wheelbase", wheelbase}, {"dt", dt}}},
      {"cost",
       {{"Q_diag", vectorToJson(q_diag)},
        {"R_diag", vectorToJson(r_diag)},
        {"Qf_diag", vectorToJson(qf_diag)}}},
      {"solver",
       {{"tol", solver.tol},
        {"max_iters", solver.max_iters},
        {"line_search_steps", solver.line_search_steps},
        {"reg_min", solver.backward.reg_min},
        {"reg_max", solver.backward.reg_max}}},
      {"cross_entropy",
       {{"population", cross_entropy.population},
        {"elite_frac", cross_entropy.elite_frac},
        {"max_gens", cross_entropy.max_gens},
        {"init_log_mean", cross_entropy.init_log_mean},
        {"init_log_std", cross_entropy.init_log_std},
        {"min_std", cross_entropy.min_std},
        {"std_smoothing", cross_entropy.std_smoothing}}},
      {"collection",
       {{"grid", gridToJson(grid)},
        {"N", realizations},
        {"control", vectorToJson(collection_control)}}},
      {"gp", {{"restarts", gp.restarts}, {"max_evaluations", gp.max_evaluations},
              {"min_variance", min_variance}}},
      {"knn", {{"k", knn.k}, {"M", knn.M}}},
      {"mpc", {{"horizon", horizon}, {"iterations", iterations}, {"x0", vectorToJson(x0)}}},
      {"benchmark",
       {{"runs_per_case", runs_per_case}, {"root_seed", root_seed}, {"mixture_order", order}}},
      {"mixtures", mixes},
  };
}

RunConfig configFromJson(const nlohmann::json& j) {
  RunConfig c = defaultConfig();
  if (auto p = j.find("plant"); p != j.end()) {
    c.wheelbase = p->value("wheelbase", c.wheelbase);
    c.dt = p->value("dt", c.dt);
  }
  if (auto p = j.find("cost"); p != j.end()) {
    if (p->contains("Q_diag")) c.q_diag = vectorFromJson(p->at("Q_diag"));
    if (p->contains("R_diag")) c.r_diag = vectorFromJson(p->at("R_diag"));
    if (p->contains("Qf_diag")) c.qf_diag = vectorFromJson(p->at("Qf_diag"));
  }
  if (auto p = j.find("solver"); p != j.end()) {
    c.solver.tol = p->value("tol", c.solver.tol);
    c.solver.max_iters = p->value("max_iters", c.solver.max_iters);
    c.solver.line_search_steps = p->value("line_search_steps", c.solver.line_search_steps);
    c.solver.backward.reg_min = p->value("reg_min", c.solver.backward.reg_min);
    c.solver.backward.reg_max = p->value("reg_max", c.solver.backward.reg_max);
  }
  if (auto p = j.find("cross_entropy"); p != j.end()) {
    auto& ce = c.cross_entropy;
    ce.population = p->value("population", ce.population);
    ce.elite_frac = p->value("elite_frac", ce.elite_frac);
    ce.max_gens = p->value("max_gens", ce.max_gens);
    ce.init_log_mean = p->value("init_log_mean", ce.init_log_mean);
    ce.init_log_std = p->value("init_log_std", ce.init_log_std);
    ce.min_std = p->value("min_std", ce.min_std);
    ce.std_smoothing = p->value("std_smoothing", ce.std_smoothing);
  }
  if (auto p = j.find("collection"); p != j.end()) {
    if (p->contains("grid")) c.grid = gridFromJson(p->at("grid"));
    c.realizations = p->value("N", c.realizations);
    if (p->contains("control")) c.collection_control = vectorFromJson(p->at("control"));
  }
  if (auto p = j.find("gp"); p != j.end()) {
    c.gp.restarts = p->value("restarts", c.gp.restarts);
    c.gp.max_evaluations = p->value("max_evaluations", c.gp.max_evaluations);
    c.min_variance = p->value("min_variance", c.min_variance);
  }
  if (auto p = j.find("knn"); p != j.end()) {
    c.knn.k = p->value("k", c.knn.k);
    c.knn.M = p->value("M", c.knn.M);
  }
  if (auto p = j.find("mpc"); p != j.end()) {
    c.horizon = p->value("horizon", c.horizon);
    c.iterations = p->value("iterations", c.iterations);
    if (p->contains("x0")) c.x0 = vectorFromJson(p->at("x0"));
  }
  if (auto p = j.find("benchmark"); p != j.end()) {
    c.runs_per_case = p->value("runs_per_case", c.runs_per_case);
    c.root_seed = p->value("root_seed", c.root_seed);
  }
  if (auto p = j.find("mixtures"); p != j.end()) {
    std::vector<std::string> order;
    if (j.contains("benchmark") && j["benchmark"].contains("mixture_order")) {
      order = j["benchmark"]["mixture_order"].get<std::vector<std::string>>();
    } else {
      for (auto it = p->begin(); it != p->end(); ++it) order.push_back(it.key());
    }
    c.mixtures.clear();
    for (const auto& name : order) {
      c.mixtures.emplace_back(name, mixtureFromJson(p->at(name)));
    }
  }
  c.validate();
  return c;
}

RunConfig loadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path.string());
  return configFromJson(nlohmann::json::parse(in));
}

}  // namespace droc
