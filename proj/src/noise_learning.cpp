#include "droc/noise_learning.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "droc/errors.hpp"

namespace droc {

int GridSpec::size() const {
  if (axes.empty()) return 0;
  int m = 1;
  for (const auto& a : axes) m *= a.count;
  return m;
}

StateVec GridSpec::state(int j) const {
  StateVec x(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t d = axes.size(); d-- > 0;) {
    const GridAxis& a = axes[d];
    const int idx = j % a.count;
    j /= a.count;
    x(static_cast<Eigen::Index>(d)) =
        a.count == 1 ? a.min : a.min + (a.max - a.min) * idx / static_cast<double>(a.count - 1);
  }
  return x;
}

void TrainingSet::validate() const {
  if (numStates() < 1 || static_cast<int>(samples.size()) != numStates()) {
    throw DimensionError("TrainingSet: one sample block per state required");
  }
  for (const auto& s : samples) {
    if (s.rows() != stateDim() || s.cols() != numRealizations()) {
      throw DimensionError("TrainingSet: sample blocks must all be state_dim × N");
    }
  }
}

Eigen::VectorXd MixtureComponent::variance(const StateVec& x) const {
  const double dx = x(0) - center(0);
  const double dy = x(1) - center(1);
  return base + amplitude * std::exp(-(dx * dx + dy * dy) / width);
}

void MixtureNoise::validate() const {
  if (weights.empty() || weights.size() != components.size()) {
    throw InvalidArgument("mixture: one weight per component required");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("mixture: weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("mixture: weights must sum to 1");
  }
  const auto dim = components.front().base.size();
  for (const auto& c : components) {
    if (c.base.size() != dim || c.amplitude.size() != dim) {
      throw DimensionError("mixture: component dimensions differ");
    }
    if ((c.base.array() < 0.0).any() || (c.amplitude.array() < 0.0).any() || !(c.width > 0.0)) {
      throw InvalidArgument("mixture: variances must be non-negative and width positive");
    }
  }
}

Eigen::VectorXd MixtureNoise::variance(const StateVec& x) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(components.front().base.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    v += weights[i] * components[i].variance(x);
  }
  return v;
}

GaussianRef mleGaussian(const Eigen::MatrixXd& samples) {
  if (samples.cols() < 2) {
    throw TooFewSamples("mleGaussian: at least 2 samples required, got " +
                        std::to_string(samples.cols()));
  }
  GaussianRef ref;
  ref.mean = Eigen::VectorXd::Zero(samples.rows());
  ref.cov_diag = samples.array().square().rowwise().mean();
  return ref;
}

GaussianRef mleGaussian(std::span<const NoiseVec> samples) {
  if (samples.size() < 2) {
    throw TooFewSamples("mleGaussian: at least 2 samples required");
  }
  Eigen::MatrixXd m(samples.front().size(), static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != m.rows()) throw DimensionError("mleGaussian: ragged samples");
    m.col(static_cast<Eigen::Index>(i)) = samples[i];
  }
  return mleGaussian(m);
}

NoiseVec sampleTrueNoise(const MixtureNoise& mix, const StateVec& x, Rng& rng) {
  const double u = rng.uniform();
  std::size_t component = mix.components.size() - 1;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < mix.weights.size(); ++i) {
    cumulative += mix.weights[i];
    if (u < cumulative) {
      component = i;
      break;
    }
  }
  const Eigen::VectorXd stddev = mix.components[component].variance(x).cwiseSqrt();
  NoiseVec w(stddev.size());
  for (Eigen::Index d = 0; d < w.size(); ++d) {
    w(d) = stddev(d) * rng.normal();
  }
  return w;
}

TrainingSet collectTrainingData(const PlantModel& model, const MixtureNoise& mix,
                                const GridSpec& grid, int realizations, const ControlVec& control,
                                Rng& rng, std::uint64_t seed_tag) {
  mix.validate();
  if (static_cast<int>(grid.axes.size()) != model.stateDim()) {
    throw DimensionError("grid must have one axis per state dimension");
  }
  if (realizations < 1 || grid.size() < 1) {
    throw InvalidArgument("collectTrainingData: need at least one state and one realization");
  }
  const int m = grid.size();
  TrainingSet ts;
  ts.grid = grid;
  ts.seed = seed_tag;
  ts.states.resize(model.stateDim(), m);
  ts.samples.reserve(m);
  for (int j = 0; j < m; ++j) {
    const StateVec x = grid.state(j);
    ts.states.col(j) = x;
    const StateVec nominal = step(model, x, control);
    Eigen::MatrixXd block(model.stateDim(), realizations);
    for (int l = 0; l < realizations; ++l) {
      // The observed noise is the residual against the noise-free prediction.
      block.col(l) = step(model, x, control, sampleTrueNoise(mix, x, rng)) - nominal;
    }
    ts.samples.push_back(std::move(block));
  }
  return ts;
}

StateDependentReference::StateDependentReference(std::vector<GpModel> gps, double min_variance)
    : gps_(std::move(gps)), min_variance_(min_variance) {
  if (!(min_variance > 0.0)) {
    throw InvalidArgument("minimum variance must be positive");
  }
}

GaussianRef StateDependentReference::predict(const StateVec& x) const {
  if (x.size() != static_cast<Eigen::Index>(gps_.size())) {
    throw DimensionError("reference: one GP per state dimension required");
  }
  GaussianRef ref;
  ref.mean = Eigen::VectorXd::Zero(x.size());
  ref.cov_diag.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = gps_[static_cast<std::size_t>(i)].predictMean(x(i));
    ref.cov_diag(i) = std::isfinite(v) ? std::max(v, min_variance_) : min_variance_;
  }
  return ref;
}

nlohmann::json StateDependentReference::toJson() const {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& gp : gps_) dims.push_back(gp.toJson());
  return {{"min_variance", min_variance_}, {"dimensions", dims}};
}

StateDependentReference StateDependentReference::fromJson(const nlohmann::json& j) {
  std::vector<GpModel> gps;
  for (const auto& d : j.at("dimensions")) gps.push_back(GpModel::fromJson(d));
  return StateDependentReference(std::move(gps), j.value("min_variance", kDefaultMinVariance));
}

Eigen::MatrixXd perStateVariances(const TrainingSet& ts) {
  ts.validate();
  Eigen::MatrixXd v(ts.stateDim(), ts.numStates());
  for (int j = 0; j < ts.numStates(); ++j) {
    v.col(j) = mleGaussian(ts.samples[static_cast<std::size_t>(j)]).cov_diag;
  }
  return v;
}

StateDependentReference fitStateDependent(const TrainingSet& ts, const GpFitOptions& opts,
                                          double min_variance) {
  if (ts.numStates() < 2 || ts.numRealizations() < 2) {
    throw TooFewSamples("fitStateDependent: need m >= 2 states and N >= 2 realizations");
  }
  const Eigen::MatrixXd variances = perStateVariances(ts);
  std::vector<GpModel> gps;
  for (int i = 0; i < ts.stateDim(); ++i) {
    const Eigen::VectorXd inputs = ts.states.row(i).transpose();
    const Eigen::VectorXd targets = variances.row(i).transpose();
    GpFitOptions dim_opts = opts;
    dim_opts.seed = opts.seed + static_cast<std::uint64_t>(i);
    gps.push_back(GpModel::fit(std::span(inputs.data(), inputs.size()),
                               std::span(targets.data(), targets.size()), dim_opts));
  }
  return StateDependentReference(std::move(gps), min_variance);
}

GaussianRef predictRef(const StateDependentReference& ref, const StateVec& x) {
  return ref.predict(x);
}

}  // namespace droc
