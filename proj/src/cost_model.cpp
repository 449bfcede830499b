#include "droc/cost_model.hpp"

#include <Eigen/Eigenvalues>

#include "droc/errors.hpp"

namespace droc {

namespace {

void requireSymmetric(const Eigen::MatrixXd& m, const char* name) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(name) + " must be square");
  }
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff())) {
    throw InvalidArgument(std::string(name) + " must be symmetric");
  }
}

double minEigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

QuadCost QuadCost::diagonal(const Eigen::VectorXd& q_diag, const Eigen::VectorXd& r_diag,
                            const Eigen::VectorXd& qf_diag, int horizon) {
  QuadCost c;
  c.Q = q_diag.asDiagonal();
  c.R = r_diag.asDiagonal();
  c.Qf = qf_diag.asDiagonal();
  c.horizon = horizon;
  c.validate();
  return c;
}

void QuadCost::validate() const {
  requireSymmetric(Q, "Q");
  requireSymmetric(R, "R");
  requireSymmetric(Qf, "Qf");
  if (Q.rows() != Qf.rows()) {
    throw DimensionError("Q and Qf dimensions differ");
  }
  if (horizon < 1) {
    throw InvalidArgument("cost horizon must be positive");
  }
  const double tol = 1e-12;
  if (minEigenvalue(Q) < -tol || minEigenvalue(Qf) < -tol) {
    throw InvalidArgument("Q and Qf must be positive semidefinite");
  }
  if (!(minEigenvalue(R) > 0.0)) {
    throw InvalidArgument("R must be positive definite");
  }
}

double stageCost(const QuadCost& c, const StateVec& x, const ControlVec& u) {
  if (x.size() != c.Q.rows() || u.size() != c.R.rows()) {
    throw DimensionError("stageCost: dimension mismatch");
  }
  return 0.5 * x.dot(c.Q * x) + 0.5 * u.dot(c.R * u);
}

double terminalCost(const QuadCost& c, const StateVec& x) {
  if (x.size() != c.Qf.rows()) {
    throw DimensionError("terminalCost: dimension mismatch");
  }
  return 0.5 * x.dot(c.Qf * x);
}

double totalCost(const QuadCost& c, std::span<const StateVec> states,
                 std::span<const ControlVec> controls, const StateVec& x_final) {
  if (states.size() != controls.size() || static_cast<int>(states.size()) != c.horizon) {
    throw DimensionError("totalCost: trajectory length must equal the horizon");
  }
  double J = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    J += stageCost(c, states[t], controls[t]);
  }
  return J + terminalCost(c, x_final);
}

CostExpansion expand(const QuadCost& c, const StateVec& x_nom, const ControlVec& u_nom) {
  CostExpansion e;
  e.value = stageCost(c, x_nom, u_nom);
  e.q_vec = c.Q * x_nom;
  e.r_vec = c.R * u_nom;
  e.Q_mat = c.Q;
  e.R_mat = c.R;
  return e;
}

QuadraticValue expandTerminal(const QuadCost& c, const StateVec& x_nom) {
  QuadraticValue v;
  v.S = c.Qf;
  v.s_vec = c.Qf * x_nom;
  v.s_scalar = terminalCost(c, x_nom);
  return v;
}

}  // namespace droc
