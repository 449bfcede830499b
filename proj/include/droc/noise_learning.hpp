#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "droc/dynamics.hpp"
#include "droc/gaussian_process.hpp"
#include "droc/rng.hpp"

namespace droc {

/// Zero-mean Gaussian with diagonal covariance.
struct GaussianRef {
  Eigen::VectorXd mean;
  Eigen::VectorXd cov_diag;
};

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  int count = 1;
};

/// Uniform grid over the state space; the last axis varies fastest.
struct GridSpec {
  std::vector<GridAxis> axes;

  int size() const;
  /// The j-th grid state in collection order.
  StateVec state(int j) const;
};

/// m grid states with N noise realizations each, in collection order.
struct TrainingSet {
  Eigen::MatrixXd states;                // state_dim × m
  std::vector<Eigen::MatrixXd> samples;  // m entries, each state_dim × N
  GridSpec grid;
  std::uint64_t seed = 0;

  int stateDim() const { return static_cast<int>(states.rows()); }
  int numStates() const { return static_cast<int>(states.cols()); }
  int numRealizations() const { return samples.empty() ? 0 : static_cast<int>(samples[0].cols()); }
  void validate() const;
};

/// One mixture component: variance base + amplitude·exp(−|p − center|² / width), p = (x, y).
struct MixtureComponent {
  Eigen::VectorXd base;
  Eigen::VectorXd amplitude;
  Eigen::Vector2d center{2.5, 2.5};
  double width = 0.5;

  Eigen::VectorXd variance(const StateVec& x) const;
};

/// Zero-mean Gaussian mixture with state-dependent diagonal covariances.
struct MixtureNoise {
  std::vector<double> weights;
  std::vector<MixtureComponent> components;

  void validate() const;
  /// Σ π_i W_i(x).
  Eigen::VectorXd variance(const StateVec& x) const;
};

/// ML zero-mean diagonal Gaussian: per-dimension mean of w² (1/N normalization).
GaussianRef mleGaussian(std::span<const NoiseVec> samples);
/// Same, with samples as the columns of a matrix.
GaussianRef mleGaussian(const Eigen::MatrixXd& samples);

/**
 * Draws a component index from the weights, then N(0, W_i(x)). Consumes exactly one
 * uniform and state_dim normals, independent of x, so paired runs stay aligned.
 */
NoiseVec sampleTrueNoise(const MixtureNoise& mix, const StateVec& x, Rng& rng);

/// Samples N noise realizations at every grid state under the given control.
TrainingSet collectTrainingData(const PlantModel& model, const MixtureNoise& mix,
                                const GridSpec& grid, int realizations, const ControlVec& control,
                                Rng& rng, std::uint64_t seed_tag = 0);

/// One scalar-input GP per state dimension predicting the noise variance of that dimension.
class StateDependentReference {
 public:
  static constexpr double kDefaultMinVariance = 1e-8;

  StateDependentReference() = default;
  StateDependentReference(std::vector<GpModel> gps, double min_variance = kDefaultMinVariance);

  GaussianRef predict(const StateVec& x) const;
  Eigen::VectorXd covariance(const StateVec& x) const { return predict(x).cov_diag; }

  const std::vector<GpModel>& gps() const { return gps_; }
  double minVariance() const { return min_variance_; }

  nlohmann::json toJson() const;
  static StateDependentReference fromJson(const nlohmann::json& j);

 private:
  std::vector<GpModel> gps_;
  double min_variance_ = kDefaultMinVariance;
};

/// Per-state MLE variances (state_dim × m).
Eigen::MatrixXd perStateVariances(const TrainingSet& ts);

StateDependentReference fitStateDependent(const TrainingSet& ts, const GpFitOptions& opts = {},
                                          double min_variance =
                                              StateDependentReference::kDefaultMinVariance);

/// W(x) = diag(max(GP_i(x_i), min_variance)).
GaussianRef predictRef(const StateDependentReference& ref, const StateVec& x);

}  // namespace droc
