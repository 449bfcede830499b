#include "droc/gaussian_process.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "droc/errors.hpp"

namespace droc {

namespace {

// Distinct inputs with their observation counts, group means and within-group scatter.
struct GroupedData {
  Eigen::VectorXd inputs;
  Eigen::VectorXd counts;
  Eigen::VectorXd means;
  double within_ss = 0.0;
  std::size_t total = 0;
};

GroupedData groupByInput(std::span<const double> inputs, std::span<const double> targets) {
  if (inputs.size() != targets.size()) {
    throw DimensionError("GP: inputs and targets differ in length");
  }
  if (inputs.empty()) {
    throw TooFewSamples("GP: no training data");
  }
  std::map<double, std::vector<double>> groups;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(inputs[i]) || !std::isfinite(targets[i])) {
      throw NumericalFault("GP: non-finite training data");
    }
    groups[inputs[i]].push_back(targets[i]);
  }
  GroupedData g;
  g.total = inputs.size();
  const auto p = static_cast<Eigen::Index>(groups.size());
  g.inputs.resize(p);
  g.counts.resize(p);
  g.means.resize(p);
  Eigen::Index i = 0;
  for (const auto& [x, ys] : groups) {
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    for (double y : ys) g.within_ss += (y - mean) * (y - mean);
    g.inputs(i) = x;
    g.counts(i) = static_cast<double>(ys.size());
    g.means(i) = mean;
    ++i;
  }
  return g;
}

Eigen::MatrixXd kernelMatrix(const Eigen::VectorXd& a, const GpHyperparameters& hp) {
  const Eigen::Index p = a.size();
  const double inv = 1.0 / (2.0 * hp.length_scale * hp.length_scale);
  Eigen::MatrixXd K(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    K(i, i) = hp.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = a(i) - a(j);
      K(i, j) = K(j, i) = hp.signal_variance * std::exp(-d * d * inv);
    }
  }
  return K;
}

// Factorizes the reduced covariance, escalating jitter tenfold from 1e-10·σ² to 1e-2·σ².
bool factorize(const GroupedData& g, const GpHyperparameters& hp, Eigen::LLT<Eigen::MatrixXd>& llt,
               double& jitter) {
  Eigen::MatrixXd K = kernelMatrix(g.inputs, hp);
  K.diagonal().array() += hp.noise_variance / g.counts.array();
  jitter = 0.0;
  llt.compute(K);
  if (llt.info() == Eigen::Success) {
    return true;
  }
  for (jitter = 1e-10 * hp.signal_variance; jitter <= 1e-2 * hp.signal_variance; jitter *= 10.0) {
    Eigen::MatrixXd Kj = K;
    Kj.diagonal().array() += jitter;
    llt.compute(Kj);
    if (llt.info() == Eigen::Success) {
      return true;
    }
  }
  return false;
}

double reducedLogLikelihood(const GroupedData& g, const GpHyperparameters& hp,
                            const Eigen::LLT<Eigen::MatrixXd>& llt) {
  constexpr double kLog2Pi = 1.8378770664093453;  // log(2π)
  const Eigen::VectorXd alpha = llt.solve(g.means);
  const double p = static_cast<double>(g.inputs.size());
  const double m = static_cast<double>(g.total);
  double ll = -0.5 * g.means.dot(alpha);
  ll -= llt.matrixLLT().diagonal().array().log().sum();
  ll -= 0.5 * p * kLog2Pi;
  // Within-group terms that the group means do not carry.
  ll -= 0.5 * g.within_ss / hp.noise_variance;
  ll -= 0.5 * (m - p) * (kLog2Pi + std::log(hp.noise_variance));
  ll -= 0.5 * g.counts.array().log().sum();
  return ll;
}

double logLikelihoodOrNegInf(const GroupedData& g, const GpHyperparameters& hp) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter;
  if (!factorize(g, hp, llt, jitter)) {
    return -std::numeric_limits<double>::infinity();
  }
  const double ll = reducedLogLikelihood(g, hp, llt);
  return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

using Point = std::array<double, 3>;

// Nelder-Mead on a box; trial points are clamped into [lo, hi]. Returns the best point seen.
Point nelderMead(const std::function<double(const Point&)>& f, Point x0, const Point& lo,
                 const Point& hi, int max_evals, double& best_value) {
  auto clamp = [&](Point p) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    return p;
  };
  std::array<Point, 4> simplex;
  std::array<double, 4> values;
  simplex[0] = clamp(x0);
  for (std::size_t i = 0; i < 3; ++i) {
    Point p = simplex[0];
    const double span = hi[i] - lo[i];
    p[i] += (p[i] + 0.1 * span <= hi[i]) ? 0.1 * span : -0.1 * span;
    simplex[i + 1] = clamp(p);
  }
  int evals = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    values[i] = f(simplex[i]);
    ++evals;
  }

  auto combine = [](const Point& a, const Point& b, double t) {
    Point r;
    for (std::size_t i = 0; i < 3; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  while (evals < max_evals) {
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::array<Point, 4> s;
    std::array<double, 4> v;
    for (std::size_t i = 0; i < 4; ++i) {
      s[i] = simplex[order[i]];
      v[i] = values[order[i]];
    }
    simplex = s;
    values = v;
    if (std::isfinite(values[3]) && values[3] - values[0] < 1e-10 * (1.0 + std::abs(values[0]))) {
      break;
    }

    Point centroid{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t d = 0; d < 3; ++d) centroid[d] += simplex[i][d] / 3.0;

    const Point reflected = clamp(combine(centroid, simplex[3], -1.0));
    const double fr = f(reflected);
    ++evals;
    if (fr < values[0]) {
      const Point expanded = clamp(combine(centroid, simplex[3], -2.0));
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[3] = expanded;
        values[3] = fe;
      } else {
        simplex[3] = reflected;
        values[3] = fr;
      }
    } else if (fr < values[2]) {
      simplex[3] = reflected;
      values[3] = fr;
    } else {
      const bool outside = fr < values[3];
      const Point contracted =
          clamp(outside ? combine(centroid, reflected, 0.5) : combine(centroid, simplex[3], 0.5));
      const double fc = f(contracted);
      ++evals;
      if (fc < std::min(fr, values[3])) {
        simplex[3] = contracted;
        values[3] = fc;
      } else {
        for (std::size_t i = 1; i < 4; ++i) {
          simplex[i] = clamp(combine(simplex[0], simplex[i], 0.5));
          values[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  best_value = values[best];
  return simplex[best];
}

GpHyperparameters fromLog(const Point& p) {
  return {std::exp(p[0]), std::exp(p[1]), std::exp(p[2])};
}

}  // namespace

double GpModel::logMarginalLikelihood(std::span<const double> inputs,
                                      std::span<const double> targets,
                                      const GpHyperparameters& hp) {
  const GroupedData g = groupByInput(inputs, targets);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter;
  if (!factorize(g, hp, llt, jitter)) {
    throw IllConditionedKernel("GP kernel matrix is not positive definite after jitter escalation");
  }
  return reducedLogLikelihood(g, hp, llt);
}

GpModel GpModel::withHyperparameters(std::span<const double> inputs,
                                     std::span<const double> targets,
                                     const GpHyperparameters& hp) {
  if (!(hp.signal_variance > 0.0) || !(hp.length_scale > 0.0) || !(hp.noise_variance > 0.0)) {
    throw InvalidArgument("GP hyperparameters must be positive");
  }
  GpModel model;
  model.inputs_.assign(inputs.begin(), inputs.end());
  model.targets_.assign(targets.begin(), targets.end());
  model.hp_ = hp;
  model.condition();
  return model;
}

GpModel GpModel::fit(std::span<const double> inputs, std::span<const double> targets,
                     const GpFitOptions& opts) {
  const GroupedData g = groupByInput(inputs, targets);

  double scale = 0.0;
  for (double t : targets) scale += t * t;
  scale = std::max(scale / static_cast<double>(targets.size()), 1e-30);
  double span = g.inputs.maxCoeff() - g.inputs.minCoeff();
  if (!(span > 0.0)) span = 1.0;

  const Point lo{std::log(1e-4 * scale), std::log(span / 100.0), std::log(1e-10 * scale)};
  const Point hi{std::log(1e4 * scale), std::log(span * 100.0), std::log(10.0 * scale)};

  auto negLl = [&](const Point& p) {
    const double ll = logLikelihoodOrNegInf(g, fromLog(p));
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  std::mt19937_64 rng(opts.seed);
  std::vector<double> start_ll;
  Point best_point{};
  double best_value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(opts.restarts, 1); ++r) {
    Point start;
    for (std::size_t d = 0; d < 3; ++d) {
      start[d] = std::uniform_real_distribution<double>(lo[d], hi[d])(rng);
    }
    const double start_value = negLl(start);
    start_ll.push_back(-start_value);
    if (start_value < best_value) {
      best_value = start_value;
      best_point = start;
    }
    double value;
    const Point p = nelderMead(negLl, start, lo, hi, opts.max_evaluations, value);
    if (value < best_value) {
      best_value = value;
      best_point = p;
    }
  }
  if (!std::isfinite(best_value)) {
    throw IllConditionedKernel("GP fit: no hyperparameter setting produced a valid kernel");
  }

  GpModel model = withHyperparameters(inputs, targets, fromLog(best_point));
  model.start_likelihoods_ = std::move(start_ll);
  return model;
}

void GpModel::condition() {
  const GroupedData g = groupByInput(inputs_, targets_);
  if (!factorize(g, hp_, llt_, jitter_)) {
    throw IllConditionedKernel("GP kernel matrix is not positive definite after jitter escalation");
  }
  unique_inputs_ = g.inputs;
  alpha_ = llt_.solve(g.means);
  log_likelihood_ = reducedLogLikelihood(g, hp_, llt_);
}

double GpModel::predictMean(double x) const {
  const double inv = 1.0 / (2.0 * hp_.length_scale * hp_.length_scale);
  double mean = 0.0;
  for (Eigen::Index i = 0; i < unique_inputs_.size(); ++i) {
    const double d = x - unique_inputs_(i);
    mean += hp_.signal_variance * std::exp(-d * d * inv) * alpha_(i);
  }
  return mean;
}

double GpModel::predictVariance(double x) const {
  const double inv = 1.0 / (2.0 * hp_.length_scale * hp_.length_scale);
  Eigen::VectorXd kstar(unique_inputs_.size());
  for (Eigen::Index i = 0; i < unique_inputs_.size(); ++i) {
    const double d = x - unique_inputs_(i);
    kstar(i) = hp_.signal_variance * std::exp(-d * d * inv);
  }
  const Eigen::VectorXd v = llt_.matrixL().solve(kstar);
  return std::max(hp_.signal_variance - v.squaredNorm(), 0.0);
}

nlohmann::json GpModel::toJson() const {
  return {{"inputs", inputs_},
          {"targets", targets_},
          {"signal_variance", hp_.signal_variance},
          {"length_scale", hp_.length_scale},
          {"noise_variance", hp_.noise_variance},
          {"jitter", jitter_},
          {"log_marginal_likelihood", log_likelihood_}};
}

GpModel GpModel::fromJson(const nlohmann::json& j) {
  const auto inputs = j.at("inputs").get<std::vector<double>>();
  const auto targets = j.at("targets").get<std::vector<double>>();
  GpHyperparameters hp{j.at("signal_variance").get<double>(), j.at("length_scale").get<double>(),
                       j.at("noise_variance").get<double>()};
  return withHyperparameters(inputs, targets, hp);
}

}  // namespace droc
