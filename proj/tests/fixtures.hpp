#pragma once

// Problem builders shared by the unit and acceptance tests.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "droc/cost_model.hpp"
#include "droc/risk_ddp.hpp"

namespace fixtures {

/// A time-invariant LQ problem expanded around the origin.
struct LqProblem {
  Eigen::MatrixXd A, B, Q, R, Qf, W;
  int n = 1;

  std::vector<droc::Linearization> lin() const {
    return std::vector<droc::Linearization>(n, droc::Linearization{A, B});
  }
  std::vector<droc::CostExpansion> cost() const {
    droc::CostExpansion e;
    e.q_vec = Eigen::VectorXd::Zero(A.rows());
    e.r_vec = Eigen::VectorXd::Zero(B.cols());
    e.Q_mat = Q;
    e.R_mat = R;
    return std::vector<droc::CostExpansion>(n, e);
  }
  droc::QuadraticValue terminal() const {
    return {Qf, Eigen::VectorXd::Zero(A.rows()), 0.0};
  }
  droc::RiskParams risk(double theta) const {
    return {theta, std::vector<Eigen::VectorXd>(n, W.diagonal())};
  }
  droc::BackwardPassResult solve(double theta) const {
    const auto l = lin();
    const auto c = cost();
    return droc::backwardPass(l, c, terminal(), risk(theta));
  }
};

/// Random stabilizable-looking system with state_dim in [1, 4] and horizon in [1, 20].
inline LqProblem randomLq(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> horizon(1, 20);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  const int nx = dim(gen);
  const int nu = std::uniform_int_distribution<int>(1, nx)(gen);
  LqProblem p;
  p.n = horizon(gen);
  p.A = Eigen::MatrixXd::Identity(nx, nx) +
        0.3 * Eigen::MatrixXd::NullaryExpr(nx, nx, [&] { return nd(gen); });
  p.B = Eigen::MatrixXd::NullaryExpr(nx, nu, [&] { return nd(gen); });
  const Eigen::MatrixXd F = Eigen::MatrixXd::NullaryExpr(nx, nx, [&] { return nd(gen); });
  p.Q = F * F.transpose() / nx;
  p.R = Eigen::MatrixXd::Identity(nu, nu) * pos(gen);
  p.Qf = p.Q + Eigen::MatrixXd::Identity(nx, nx);
  p.W = Eigen::VectorXd::NullaryExpr(nx, [&] { return 0.1 * pos(gen); }).asDiagonal();
  return p;
}

inline double maxGainError(const std::vector<Eigen::MatrixXd>& a,
                           const std::vector<Eigen::MatrixXd>& b) {
  double err = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) err = std::max(err, (a[t] - b[t]).cwiseAbs().maxCoeff());
  return err;
}

}  // namespace fixtures
