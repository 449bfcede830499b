#include "droc/kl_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "droc/errors.hpp"

namespace droc {

namespace {

constexpr double kDistanceFloor = 1e-12;

// k-th smallest entry (1-based) of the squared distances, returned as a distance.
double kthDistance(Eigen::VectorXd& squared, int k) {
  auto* begin = squared.data();
  std::nth_element(begin, begin + (k - 1), begin + squared.size());
  return std::sqrt(std::max(begin[k - 1], 0.0));
}

// k-th nearest distance from v within sorted, walking outwards from [left, right).
double kthSorted(const std::vector<double>& sorted, double v, std::ptrdiff_t left,
                 std::ptrdiff_t right, int k) {
  const auto size = static_cast<std::ptrdiff_t>(sorted.size());
  double dist = 0.0;
  for (int step = 0; step < k; ++step) {
    const double dl = left >= 0 ? v - sorted[left] : std::numeric_limits<double>::infinity();
    const double dr = right < size ? sorted[right] - v : std::numeric_limits<double>::infinity();
    if (dl <= dr) {
      dist = dl;
      --left;
    } else {
      dist = dr;
      ++right;
    }
  }
  return dist;
}

// Scalar samples: neighbours by sorting, O((N + M) log(N + M) + (N + M) k).
KlEstimate knnKlScalar(const Eigen::MatrixXd& p_samples, const Eigen::MatrixXd& q_samples, int k) {
  std::vector<double> p(p_samples.data(), p_samples.data() + p_samples.size());
  std::vector<double> q(q_samples.data(), q_samples.data() + q_samples.size());
  std::sort(p.begin(), p.end());
  std::sort(q.begin(), q.end());
  KlEstimate est;
  double log_ratio_sum = 0.0;
  const auto N = static_cast<std::ptrdiff_t>(p.size());
  for (std::ptrdiff_t i = 0; i < N; ++i) {
    double rho = kthSorted(p, p[i], i - 1, i + 1, k);
    const auto at = std::lower_bound(q.begin(), q.end(), p[i]) - q.begin();
    double nu = kthSorted(q, p[i], at - 1, at, k);
    if (rho < kDistanceFloor) {
      rho = kDistanceFloor;
      est.degenerate = true;
    }
    if (nu < kDistanceFloor) {
      nu = kDistanceFloor;
      est.degenerate = true;
    }
    log_ratio_sum += std::log(nu / rho);
  }
  est.value = log_ratio_sum / static_cast<double>(N) +
              std::log(static_cast<double>(q.size()) / static_cast<double>(N - 1));
  return est;
}

}  // namespace

KlEstimate knnKl(const Eigen::MatrixXd& p_samples, const Eigen::MatrixXd& q_samples, int k) {
  const auto r = p_samples.rows();
  const auto N = p_samples.cols();
  const auto M = q_samples.cols();
  if (q_samples.rows() != r || r < 1) {
    throw DimensionError("knnKl: sample dimensions differ");
  }
  if (k < 1 || N <= k || M < k) {
    throw InvalidArgument("knnKl: need 1 <= k < N and k <= M (k=" + std::to_string(k) +
                          ", N=" + std::to_string(N) + ", M=" + std::to_string(M) + ")");
  }

  if (r == 1) {
    return knnKlScalar(p_samples, q_samples, k);
  }

  KlEstimate est;
  double log_ratio_sum = 0.0;
  Eigen::VectorXd within(N - 1);
  Eigen::VectorXd across(M);
  for (Eigen::Index i = 0; i < N; ++i) {
    const auto pi = p_samples.col(i);
    if (i > 0) {
      within.head(i) = (p_samples.leftCols(i).colwise() - pi).colwise().squaredNorm().transpose();
    }
    if (i + 1 < N) {
      within.tail(N - 1 - i) =
          (p_samples.rightCols(N - 1 - i).colwise() - pi).colwise().squaredNorm().transpose();
    }
    across = (q_samples.colwise() - pi).colwise().squaredNorm().transpose();

    double rho = kthDistance(within, k);
    double nu = kthDistance(across, k);
    if (rho < kDistanceFloor) {
      rho = kDistanceFloor;
      est.degenerate = true;
    }
    if (nu < kDistanceFloor) {
      nu = kDistanceFloor;
      est.degenerate = true;
    }
    log_ratio_sum += std::log(nu / rho);
  }
  est.value = static_cast<double>(r) / static_cast<double>(N) * log_ratio_sum +
              std::log(static_cast<double>(M) / static_cast<double>(N - 1));
  return est;
}

Eigen::MatrixXd sampleGaussian(const GaussianRef& ref, int count, Rng& rng) {
  const Eigen::VectorXd sd = ref.cov_diag.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd draws(sd.size(), count);
  for (int c = 0; c < count; ++c) {
    for (Eigen::Index d = 0; d < sd.size(); ++d) {
      draws(d, c) = ref.mean(d) + sd(d) * rng.normal();
    }
  }
  return draws;
}

double stationaryBound(const Eigen::MatrixXd& true_samples, const GaussianRef& q,
                       const KnnConfig& cfg, Rng& rng) {
  if (true_samples.cols() == 0) {
    throw TooFewSamples("stationaryBound: no true samples");
  }
  if (q.cov_diag.size() != true_samples.rows() || (q.cov_diag.array() < 0.0).any()) {
    throw InvalidArgument("stationaryBound: invalid reference distribution");
  }
  const Eigen::MatrixXd draws = sampleGaussian(q, cfg.M, rng);
  return std::max(knnKl(true_samples, draws, cfg.k).value, 0.0);
}

Eigen::MatrixXd jointWindow(const TrainingSet& ts, int j, int n) {
  const int c = ts.stateDim();
  Eigen::MatrixXd joint(c * (n + 1), ts.numRealizations());
  for (int s = 0; s <= n; ++s) {
    joint.middleRows(s * c, c) = ts.samples[static_cast<std::size_t>(j + s)];
  }
  return joint;
}

HorizonBound horizonBound(const TrainingSet& ts, int n, const KnnConfig& cfg,
                          std::uint64_t root_seed) {
  ts.validate();
  const int m = ts.numStates();
  if (n < 0 || n >= m) {
    throw WindowTooLarge("horizonBound: need n < m (n=" + std::to_string(n) +
                         ", m=" + std::to_string(m) + ")");
  }
  HorizonBound out;
  out.per_window.reserve(static_cast<std::size_t>(m - n));
  for (int j = 0; j < m - n; ++j) {
    const Eigen::MatrixXd joint = jointWindow(ts, j, n);
    const GaussianRef q = mleGaussian(joint);
    Rng rng = Rng::stream(root_seed, {static_cast<std::uint64_t>(j)});
    const Eigen::MatrixXd draws = sampleGaussian(q, cfg.M, rng);
    const KlEstimate est = knnKl(joint, draws, cfg.k);
    out.degenerate = out.degenerate || est.degenerate;
    out.per_window.push_back(std::max(est.value, 0.0));
  }
  out.d_max = *std::max_element(out.per_window.begin(), out.per_window.end());
  return out;
}

}  // namespace droc
