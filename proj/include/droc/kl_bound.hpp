#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "droc/noise_learning.hpp"
#include "droc/rng.hpp"

namespace droc {

struct KnnConfig {
  int k = 10;    // neighbour order
  int M = 100;   // reference samples drawn from q
};

struct KlEstimate {
  double value = 0.0;
  bool degenerate = false;  // a zero neighbour distance was floored to 1e-12
};

/**
 * kNN estimate of D(p‖q) from samples (columns):
 *   (r/N) Σ_i ln(ν_i/ρ_i) + ln(M/(N−1))
 * with ρ_i the k-th neighbour distance of p_i within p (excluding itself) and
 * ν_i the k-th neighbour distance of p_i within q. The value may be negative.
 * Scalar samples use a sorted neighbour walk instead of the brute-force scan.
 */
KlEstimate knnKl(const Eigen::MatrixXd& p_samples, const Eigen::MatrixXd& q_samples, int k);

/// count draws (columns) from the diagonal Gaussian ref.
Eigen::MatrixXd sampleGaussian(const GaussianRef& ref, int count, Rng& rng);

/// KL radius for stationary noise: kNN estimate against M draws from q, floored at 0.
double stationaryBound(const Eigen::MatrixXd& true_samples, const GaussianRef& q,
                       const KnnConfig& cfg, Rng& rng);

/// Joint noise vectors [w_j; ...; w_{j+n}] for every realization (c(n+1) × N).
Eigen::MatrixXd jointWindow(const TrainingSet& ts, int j, int n);

struct HorizonBound {
  double d_max = 0.0;
  std::vector<double> per_window;  // each floored at 0
  bool degenerate = false;
};

/**
 * Global maximum KL bound over receding horizons. Window j stacks the draws at
 * states j..j+n, fits a zero-mean diagonal Gaussian to them, draws M joint samples
 * from it with the stream (root_seed, j) and estimates the divergence.
 * Throws WindowTooLarge when n >= m.
 */
HorizonBound horizonBound(const TrainingSet& ts, int n, const KnnConfig& cfg,
                          std::uint64_t root_seed);

}  // namespace droc
