#include "droc/risk_ddp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "droc/errors.hpp"

namespace droc {

RiskInflation inflateValue(const Eigen::MatrixXd& S, const Eigen::VectorXd& s_vec,
                           const Eigen::VectorXd& W_diag, double theta) {
  if (theta < 0.0 || !std::isfinite(theta)) {
    throw InvalidArgument("theta must be finite and non-negative");
  }
  if (W_diag.size() != S.rows() || s_vec.size() != S.rows()) {
    throw DimensionError("inflateValue: noise covariance dimension mismatch");
  }
  if ((W_diag.array() < 0.0).any()) {
    throw InvalidArgument("noise covariance diagonal must be non-negative");
  }

  RiskInflation out;
  if (theta == 0.0) {
    out.S_tilde = S;
    out.s_tilde = s_vec;
    out.constant = 0.5 * W_diag.dot(S.diagonal());
    return out;
  }

  // I − θSW is inverted through the symmetric form I − θ W^½ S W^½, which is
  // congruent to W⁻¹ − θS and stays defined when W has zero entries.
  const Eigen::VectorXd w_half = W_diag.cwiseSqrt();
  const Eigen::MatrixXd P = w_half.asDiagonal() * S * w_half.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (P + P.transpose()));
  const Eigen::VectorXd mu = es.eigenvalues();
  const Eigen::VectorXd margin = (1.0 - theta * mu.array()).matrix();
  out.min_margin = margin.minCoeff();
  if (!(out.min_margin > 0.0)) {
    throw RiskInfeasible("theta = " + std::to_string(theta) +
                         " makes W^-1 - theta*S indefinite (smallest eigenvalue of the "
                         "normalized form " + std::to_string(out.min_margin) + ")");
  }

  const Eigen::MatrixXd& V = es.eigenvectors();
  const Eigen::MatrixXd M_inv = V * margin.cwiseInverse().asDiagonal() * V.transpose();
  const Eigen::MatrixXd SW = S * w_half.asDiagonal();
  out.S_tilde = S + theta * SW * M_inv * SW.transpose();
  out.S_tilde = 0.5 * (out.S_tilde + out.S_tilde.transpose());
  const Eigen::VectorXd ws = w_half.asDiagonal() * s_vec;
  out.s_tilde = s_vec + theta * SW * (M_inv * ws);

  double log_det = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    log_det += std::log1p(-theta * mu(i));
  }
  out.constant = -log_det / (2.0 * theta) + 0.5 * theta * ws.dot(M_inv * ws);
  return out;
}

namespace {

void checkSequences(std::span<const Linearization> lin, std::span<const CostExpansion> cost,
                    const RiskParams& rp) {
  if (lin.empty() || lin.size() != cost.size() || rp.W_diag.size() != lin.size()) {
    throw DimensionError("backward pass: linearization, cost and noise sequences must share length n");
  }
}

// H + λI with λ doubling from reg_min until the Cholesky factorization succeeds.
Eigen::LLT<Eigen::MatrixXd> factorizeControlHessian(const Eigen::MatrixXd& H,
                                                    const BackwardOptions& opts, double& lambda) {
  lambda = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() == Eigen::Success && H.allFinite()) {
    return llt;
  }
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(H.rows(), H.cols());
  for (lambda = opts.reg_min; lambda <= opts.reg_max; lambda *= 2.0) {
    llt.compute(H + lambda * I);
    if (llt.info() == Eigen::Success) {
      return llt;
    }
  }
  throw SingularH("control Hessian is not positive definite after regularization");
}

}  // namespace

BackwardPassResult backwardPass(std::span<const Linearization> lin,
                                std::span<const CostExpansion> cost,
                                const QuadraticValue& terminal, const RiskParams& rp,
                                const BackwardOptions& opts) {
  checkSequences(lin, cost, rp);
  const std::size_t n = lin.size();

  BackwardPassResult out;
  out.k.resize(n);
  out.K.resize(n);
  out.aux.resize(n);

  QuadraticValue next = terminal;
  for (std::size_t i = n; i-- > 0;) {
    const Linearization& L = lin[i];
    const CostExpansion& c = cost[i];
    const RiskInflation inf = inflateValue(next.S, next.s_vec, rp.W_diag[i], rp.theta);

    const Eigen::MatrixXd SB = inf.S_tilde * L.B;
    const Eigen::MatrixXd Qxx = c.Q_mat + L.A.transpose() * inf.S_tilde * L.A;
    const Eigen::VectorXd Qx = c.q_vec + L.A.transpose() * inf.s_tilde;

    BackwardAux& aux = out.aux[i];
    aux.H = c.R_mat + L.B.transpose() * SB;
    aux.H = 0.5 * (aux.H + aux.H.transpose());
    aux.G = SB.transpose() * L.A;
    aux.g_vec = c.r_vec + L.B.transpose() * inf.s_tilde;

    const auto llt = factorizeControlHessian(aux.H, opts, aux.regularization);
    Eigen::VectorXd& k = out.k[i];
    Eigen::MatrixXd& K = out.K[i];
    k = -llt.solve(aux.g_vec);
    K = -llt.solve(aux.G);

    const Eigen::MatrixXd KtH = K.transpose() * aux.H;
    Eigen::MatrixXd S = Qxx + KtH * K + K.transpose() * aux.G + aux.G.transpose() * K;
    out.max_asymmetry = std::max(out.max_asymmetry, (S - S.transpose()).cwiseAbs().maxCoeff());
    next.S = 0.5 * (S + S.transpose());
    next.s_vec = Qx + KtH * k + K.transpose() * aux.g_vec + aux.G.transpose() * k;
    next.s_scalar = c.value + next.s_scalar + inf.constant + 0.5 * k.dot(aux.H * k) +
                    k.dot(aux.g_vec);
    if (!next.S.allFinite() || !next.s_vec.allFinite() || !std::isfinite(next.s_scalar)) {
      throw NumericalFault("backward pass produced a non-finite value function");
    }
  }
  out.value = std::move(next);
  return out;
}

QuadraticValue evaluatePolicy(std::span<const Linearization> lin,
                              std::span<const CostExpansion> cost,
                              const QuadraticValue& terminal, const RiskParams& rp,
                              std::span<const Eigen::MatrixXd> K) {
  checkSequences(lin, cost, rp);
  if (K.size() != lin.size()) {
    throw DimensionError("evaluatePolicy: gain sequence length mismatch");
  }
  QuadraticValue next = terminal;
  for (std::size_t i = lin.size(); i-- > 0;) {
    const Linearization& L = lin[i];
    const CostExpansion& c = cost[i];
    const RiskInflation inf = inflateValue(next.S, next.s_vec, rp.W_diag[i], rp.theta);

    const Eigen::MatrixXd SB = inf.S_tilde * L.B;
    const Eigen::MatrixXd H = c.R_mat + L.B.transpose() * SB;
    const Eigen::MatrixXd G = SB.transpose() * L.A;
    const Eigen::VectorXd g = c.r_vec + L.B.transpose() * inf.s_tilde;
    const Eigen::MatrixXd& Ki = K[i];

    Eigen::MatrixXd S = c.Q_mat + L.A.transpose() * inf.S_tilde * L.A +
                        Ki.transpose() * H * Ki + Ki.transpose() * G + G.transpose() * Ki;
    next.S = 0.5 * (S + S.transpose());
    next.s_vec = c.q_vec + L.A.transpose() * inf.s_tilde + Ki.transpose() * g;
    next.s_scalar = c.value + next.s_scalar + inf.constant;
    if (!next.S.allFinite() || !std::isfinite(next.s_scalar)) {
      throw NumericalFault("policy evaluation produced a non-finite value function");
    }
  }
  return next;
}

Trajectory forwardRollout(const PlantModel& model, const AffinePolicy& policy, const StateVec& x0,
                          std::span<const NoiseVec> noise, double alpha) {
  const int n = policy.horizon();
  if (static_cast<int>(noise.size()) != n || static_cast<int>(policy.k.size()) != n ||
      static_cast<int>(policy.K.size()) != n || static_cast<int>(policy.x_nom.size()) != n + 1) {
    throw DimensionError("forwardRollout: policy and noise lengths must equal the horizon");
  }
  Trajectory traj;
  traj.states.reserve(n + 1);
  traj.controls.reserve(n);
  traj.states.push_back(x0);
  for (int t = 0; t < n; ++t) {
    const StateVec& x = traj.states.back();
    ControlVec u = policy.u_nom[t] + alpha * policy.k[t] + policy.K[t] * (x - policy.x_nom[t]);
    if (!u.allFinite()) {
      throw NumericalFault("forwardRollout: non-finite control");
    }
    StateVec next = step(model, x, u, noise[t]);
    traj.controls.push_back(std::move(u));
    traj.states.push_back(std::move(next));
  }
  return traj;
}

NoiseCovarianceFn zeroNoise(int state_dim) {
  return [state_dim](const StateVec&) { return Eigen::VectorXd::Zero(state_dim); };
}

namespace {

// Local linear-quadratic model of the problem around one trajectory.
struct LocalModel {
  std::vector<Linearization> lin;
  std::vector<CostExpansion> cost;
  QuadraticValue terminal;
  RiskParams rp;
};

LocalModel buildLocalModel(const PlantModel& model, const QuadCost& cost,
                           const NoiseCovarianceFn& reference, double theta,
                           const Trajectory& traj) {
  const std::size_t n = traj.controls.size();
  LocalModel local;
  local.lin.reserve(n);
  local.cost.reserve(n);
  local.rp.theta = theta;
  local.rp.W_diag.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    local.lin.push_back(linearize(model, traj.states[t], traj.controls[t]));
    local.cost.push_back(expand(cost, traj.states[t], traj.controls[t]));
    local.rp.W_diag.push_back(reference(traj.states[t]));
  }
  local.terminal = expandTerminal(cost, traj.states[n]);
  return local;
}

double objectiveOf(const LocalModel& local, std::span<const Eigen::MatrixXd> K) {
  try {
    return evaluatePolicy(local.lin, local.cost, local.terminal, local.rp, K).s_scalar;
  } catch (const RiskInfeasible&) {
    return std::numeric_limits<double>::infinity();
  } catch (const NumericalFault&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

InnerSolution solveInner(const PlantModel& model, const QuadCost& cost,
                         const NoiseCovarianceFn& reference, double theta, const StateVec& x0,
                         std::span<const ControlVec> u_init, const SolverOptions& opts) {
  const int n = static_cast<int>(u_init.size());
  if (n != cost.horizon) {
    throw DimensionError("solveInner: initial control sequence must have the cost horizon length");
  }
  const std::vector<NoiseVec> zero_noise(n, NoiseVec::Zero(model.stateDim()));

  // A nominal trajectory with its local model, optimal gains and merit. The merit is the
  // entropic value of the nominal under those gains with the feedforward step withheld, so it
  // depends on the trajectory alone and equals the backward-pass value once k vanishes.
  struct Iterate {
    Trajectory traj;
    BackwardPassResult bp;
    double merit = 0.0;
  };
  auto analyse = [&](Trajectory traj) {
    const LocalModel local = buildLocalModel(model, cost, reference, theta, traj);
    Iterate it{std::move(traj), backwardPass(local.lin, local.cost, local.terminal, local.rp,
                                             opts.backward)};
    it.merit = objectiveOf(local, it.bp.K);
    return it;
  };

  AffinePolicy open_loop;
  open_loop.u_nom.assign(u_init.begin(), u_init.end());
  open_loop.k.assign(n, Eigen::VectorXd::Zero(model.controlDim()));
  open_loop.K.assign(n, Eigen::MatrixXd::Zero(model.controlDim(), model.stateDim()));
  open_loop.x_nom.assign(n + 1, x0);
  Iterate current = analyse(forwardRollout(model, open_loop, x0, zero_noise));

  InnerSolution sol;
  AffinePolicy policy;
  while (true) {
    policy.k = current.bp.k;
    policy.K = current.bp.K;
    policy.x_nom = current.traj.states;
    policy.u_nom = current.traj.controls;
    if (sol.converged) break;
    if (sol.iterations >= opts.max_iters) {
      sol.hit_max_iterations = true;
      break;
    }

    double k_norm = 0.0;
    for (const auto& k : policy.k) {
      k_norm = std::max(k_norm, k.cwiseAbs().maxCoeff());
    }
    if (k_norm < 1e-12) {
      sol.converged = true;
      break;
    }

    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < opts.line_search_steps; ++ls, alpha *= 0.5) {
      Iterate candidate;
      try {
        Trajectory traj = forwardRollout(model, policy, x0, zero_noise, alpha);
        for (const auto& u : traj.controls) {
          model.checkControl(u);
        }
        candidate = analyse(std::move(traj));
      } catch (const Error&) {
        continue;
      }
      if (candidate.merit < current.merit) {
        const double base = current.merit;
        sol.accepted.emplace_back(base, candidate.merit);
        current = std::move(candidate);
        ++sol.iterations;
        accepted = true;
        const double rel = std::abs(base - current.merit) / std::max(std::abs(base), 1e-12);
        if (std::isfinite(base) && rel < opts.tol) {
          sol.converged = true;
        }
        break;
      }
    }
    if (!accepted) {
      // No step improves the merit: the nominal is a local minimum to line-search precision.
      sol.converged = true;
      break;
    }
  }
  sol.policy = std::move(policy);
  sol.entropic_risk = current.merit;
  return sol;
}

double entropicRiskMc(std::span<const double> samples, double theta) {
  if (samples.empty()) {
    throw InvalidArgument("entropicRiskMc: no samples");
  }
  if (theta < 0.0) {
    throw InvalidArgument("entropicRiskMc: theta must be non-negative");
  }
  const double count = static_cast<double>(samples.size());
  if (theta == 0.0) {
    return std::accumulate(samples.begin(), samples.end(), 0.0) / count;
  }
  const double peak = theta * *std::max_element(samples.begin(), samples.end());
  // log mean exp(θJ − peak) = log1p(mean(expm1(θJ − peak))), accurate for tiny θ.
  double acc = 0.0;
  for (double j : samples) {
    acc += std::expm1(theta * j - peak);
  }
  return (peak + std::log1p(acc / count)) / theta;
}

}  // namespace droc
