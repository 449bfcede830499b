#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "droc/dynamics.hpp"

namespace droc {

/// Time-invariant quadratic regulator: l(x,u) = ½xᵀQx + ½uᵀRu, l_f(x) = ½xᵀQ_f x.
struct QuadCost {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd Qf;
  int horizon = 1;

  /// Builds a cost from diagonal weights; throws InvalidArgument for Q/Qf < 0 or R <= 0.
  static QuadCost diagonal(const Eigen::VectorXd& q_diag, const Eigen::VectorXd& r_diag,
                           const Eigen::VectorXd& qf_diag, int horizon);

  /// Checks symmetry, PSD/PD and dimensions.
  void validate() const;
};

/// Second-order expansion of the stage cost at a nominal point.
struct CostExpansion {
  double value = 0.0;  // l(x_nom, u_nom)
  Eigen::VectorXd q_vec;
  Eigen::VectorXd r_vec;
  Eigen::MatrixXd Q_mat;
  Eigen::MatrixXd R_mat;
};

/// A quadratic value function ½δxᵀSδx + sᵀδx + s_scalar.
struct QuadraticValue {
  Eigen::MatrixXd S;
  Eigen::VectorXd s_vec;
  double s_scalar = 0.0;
};

double stageCost(const QuadCost& c, const StateVec& x, const ControlVec& u);
double terminalCost(const QuadCost& c, const StateVec& x);

/// Σ stage costs over the n (state, control) pairs plus the terminal cost of x_final.
double totalCost(const QuadCost& c, std::span<const StateVec> states,
                 std::span<const ControlVec> controls, const StateVec& x_final);

CostExpansion expand(const QuadCost& c, const StateVec& x_nom, const ControlVec& u_nom);

/// Exact terminal value around x_nom: S = Q_f, s = Q_f x_nom, scalar = l_f(x_nom).
QuadraticValue expandTerminal(const QuadCost& c, const StateVec& x_nom);

}  // namespace droc
