#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "droc/cost_model.hpp"
#include "droc/dynamics.hpp"

namespace droc {

/// Risk sensitivity and the per-step diagonal noise covariances of the reference distribution.
struct RiskParams {
  double theta = 0.0;
  std::vector<Eigen::VectorXd> W_diag;  // one diagonal per step, length n
};

/// δu_t = k_t + K_t δx_t around (x_nom, u_nom); x_nom has n+1 entries.
struct AffinePolicy {
  std::vector<Eigen::VectorXd> k;
  std::vector<Eigen::MatrixXd> K;
  std::vector<StateVec> x_nom;
  std::vector<ControlVec> u_nom;

  int horizon() const { return static_cast<int>(u_nom.size()); }
};

/// Control Hessian surrogate H, cross term G and control gradient g of one backward step.
struct BackwardAux {
  Eigen::MatrixXd H;
  Eigen::MatrixXd G;
  Eigen::VectorXd g_vec;
  double regularization = 0.0;
};

struct BackwardOptions {
  double reg_min = 1e-6;
  double reg_max = 1e2;
};

struct BackwardPassResult {
  std::vector<Eigen::VectorXd> k;
  std::vector<Eigen::MatrixXd> K;
  std::vector<BackwardAux> aux;
  QuadraticValue value;         // at t = 1
  double max_asymmetry = 0.0;   // largest |S - Sᵀ| seen before symmetrization
};

/**
 * Entropic-risk expectation of a quadratic value under additive Gaussian noise.
 *
 * For V(δx) = ½δxᵀSδx + sᵀδx + c and w ~ N(0, W), R_θ(V(μ + w)) is again quadratic
 * in μ with Hessian S̃ = (I − θSW)⁻¹S, gradient s̃ = (I − θSW)⁻¹s and an added
 * constant −(1/2θ) log det(I − θSW) + (θ/2) sᵀ(W⁻¹ − θS)⁻¹s (½ tr(WS) at θ = 0).
 */
struct RiskInflation {
  Eigen::MatrixXd S_tilde;
  Eigen::VectorXd s_tilde;
  double constant = 0.0;
  double min_margin = 1.0;  // smallest eigenvalue of I − θ W^½ S W^½
};

/// Throws RiskInfeasible when W⁻¹ − θS is not positive definite.
RiskInflation inflateValue(const Eigen::MatrixXd& S, const Eigen::VectorXd& s_vec,
                           const Eigen::VectorXd& W_diag, double theta);

/**
 * Risk-sensitive Riccati recursion from the terminal value back to t = 1.
 * At θ = 0 this is the iLQG/LQR recursion. Throws RiskInfeasible or SingularH.
 */
BackwardPassResult backwardPass(std::span<const Linearization> lin,
                                std::span<const CostExpansion> cost,
                                const QuadraticValue& terminal, const RiskParams& rp,
                                const BackwardOptions& opts = {});

/// Entropic value of the feedback-only policy δu = K δx around the expansion point.
QuadraticValue evaluatePolicy(std::span<const Linearization> lin,
                              std::span<const CostExpansion> cost,
                              const QuadraticValue& terminal, const RiskParams& rp,
                              std::span<const Eigen::MatrixXd> K);

struct Trajectory {
  std::vector<StateVec> states;      // n + 1
  std::vector<ControlVec> controls;  // n
};

/// Applies u_t = u_nom_t + alpha k_t + K_t (x_t − x_nom_t) through the plant with noise w_t.
Trajectory forwardRollout(const PlantModel& model, const AffinePolicy& policy, const StateVec& x0,
                          std::span<const NoiseVec> noise, double alpha = 1.0);

/// Diagonal covariance of the reference noise at a state.
using NoiseCovarianceFn = std::function<Eigen::VectorXd(const StateVec&)>;

/// Reference with zero covariance everywhere.
NoiseCovarianceFn zeroNoise(int state_dim);

struct SolverOptions {
  double tol = 1e-6;
  int max_iters = 100;
  int line_search_steps = 11;  // α = 1, ½, ..., 2⁻¹⁰
  BackwardOptions backward;
};

struct InnerSolution {
  AffinePolicy policy;
  double entropic_risk = 0.0;  // R_θ(J), Bellman-propagated value at t = 1
  int iterations = 0;          // accepted steps
  bool converged = false;
  bool hit_max_iterations = false;
  std::vector<std::pair<double, double>> accepted;  // (objective before, objective after)
};

/**
 * Iterates linearize → backward pass → line-searched rollout until the relative
 * objective change drops below tol. The objective of a nominal is its entropic value
 * under its own optimal gains without the feedforward step; it is also the returned
 * R_θ. RiskInfeasible from the backward pass propagates.
 */
InnerSolution solveInner(const PlantModel& model, const QuadCost& cost,
                         const NoiseCovarianceFn& reference, double theta, const StateVec& x0,
                         std::span<const ControlVec> u_init, const SolverOptions& opts = {});

/// (1/θ) log mean exp(θ J), computed stably; the sample mean at θ = 0.
double entropicRiskMc(std::span<const double> samples, double theta);

}  // namespace droc
