#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace droc {

/// Hyperparameters of a zero-mean GP with squared-exponential kernel plus observation noise.
struct GpHyperparameters {
  double signal_variance = 1.0;  // σ²
  double length_scale = 1.0;     // l
  double noise_variance = 1e-6;  // observation noise on the kernel diagonal
};

struct GpFitOptions {
  int restarts = 8;
  int max_evaluations = 400;  // per Nelder-Mead run
  std::uint64_t seed = 0;
};

/**
 * Scalar-input GP regression, k(a, a') = σ² exp(−(a − a')² / 2l²).
 *
 * Repeated inputs are collapsed to their group means with noise σ_n²/count;
 * the posterior and the log marginal likelihood are identical to the full
 * m-point model, but the linear algebra scales with the number of distinct inputs.
 */
class GpModel {
 public:
  GpModel() = default;

  /// Fits hyperparameters by maximizing the log marginal likelihood from several random starts.
  static GpModel fit(std::span<const double> inputs, std::span<const double> targets,
                     const GpFitOptions& opts = {});

  /// Conditions on the data with fixed hyperparameters.
  static GpModel withHyperparameters(std::span<const double> inputs,
                                     std::span<const double> targets,
                                     const GpHyperparameters& hp);

  /// Log marginal likelihood of the data under hp.
  static double logMarginalLikelihood(std::span<const double> inputs,
                                      std::span<const double> targets,
                                      const GpHyperparameters& hp);

  double predictMean(double x) const;
  /// Posterior variance of the latent function (≥ 0).
  double predictVariance(double x) const;

  const GpHyperparameters& hyperparameters() const { return hp_; }
  double jitter() const { return jitter_; }
  double logLikelihood() const { return log_likelihood_; }
  /// Log likelihood at each random start (before optimization).
  const std::vector<double>& startLikelihoods() const { return start_likelihoods_; }
  const std::vector<double>& inputs() const { return inputs_; }
  const std::vector<double>& targets() const { return targets_; }

  nlohmann::json toJson() const;
  static GpModel fromJson(const nlohmann::json& j);

 private:
  void condition();

  std::vector<double> inputs_;
  std::vector<double> targets_;
  GpHyperparameters hp_;
  double jitter_ = 0.0;
  double log_likelihood_ = 0.0;
  std::vector<double> start_likelihoods_;

  // Conditioned state over the distinct inputs.
  Eigen::VectorXd unique_inputs_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace droc
