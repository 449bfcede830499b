#include "droc/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "droc/errors.hpp"

namespace droc {

PlantModel::PlantModel(int state_dim, int control_dim, double dt)
    : state_dim_(state_dim), control_dim_(control_dim), dt_(dt) {
  if (state_dim <= 0 || control_dim <= 0) {
    throw InvalidArgument("PlantModel: dimensions must be positive");
  }
  // dt == 0 is accepted so the zero-step limit can be exercised.
  if (!std::isfinite(dt) || dt < 0.0) {
    throw InvalidArgument("PlantModel: dt must be finite and non-negative");
  }
}

KinematicBicycle::KinematicBicycle(double wheelbase, double dt)
    : PlantModel(4, 2, dt), wheelbase_(wheelbase) {
  if (!(wheelbase > 0.0) || !std::isfinite(wheelbase)) {
    throw InvalidArgument("KinematicBicycle: wheelbase must be positive");
  }
}

void KinematicBicycle::checkControl(const ControlVec& u) const {
  if (!(std::abs(u(car::kSteer)) < std::numbers::pi / 2.0)) {
    throw SingularLinearization("steering angle " + std::to_string(u(car::kSteer)) +
                                " is outside (-pi/2, pi/2)");
  }
}

Eigen::VectorXd KinematicBicycle::drift(const StateVec& x, const ControlVec& u) const {
  const double yaw = x(car::kYaw);
  const double v = x(car::kSpeed);
  Eigen::VectorXd f(4);
  f << v * std::cos(yaw), v * std::sin(yaw), v * std::tan(u(car::kSteer)) / wheelbase_,
      u(car::kAccel);
  return f;
}

void KinematicBicycle::driftJacobians(const StateVec& x, const ControlVec& u, Eigen::MatrixXd& fx,
                                      Eigen::MatrixXd& fu) const {
  const double yaw = x(car::kYaw);
  const double v = x(car::kSpeed);
  const double steer = u(car::kSteer);
  const double c = std::cos(steer);

  fx.setZero(4, 4);
  fx(car::kX, car::kYaw) = -v * std::sin(yaw);
  fx(car::kX, car::kSpeed) = std::cos(yaw);
  fx(car::kY, car::kYaw) = v * std::cos(yaw);
  fx(car::kY, car::kSpeed) = std::sin(yaw);
  fx(car::kYaw, car::kSpeed) = std::tan(steer) / wheelbase_;

  fu.setZero(4, 2);
  fu(car::kYaw, car::kSteer) = v / (wheelbase_ * c * c);
  fu(car::kSpeed, car::kAccel) = 1.0;
}

LinearPlant::LinearPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, double dt)
    : PlantModel(static_cast<int>(A.rows()), static_cast<int>(B.cols()), dt) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw DimensionError("LinearPlant: A must be square and B must have A.rows() rows");
  }
  if (!(dt > 0.0)) {
    throw InvalidArgument("LinearPlant: dt must be positive");
  }
  fx_ = (A - Eigen::MatrixXd::Identity(A.rows(), A.cols())) / dt;
  fu_ = B / dt;
}

Eigen::VectorXd LinearPlant::drift(const StateVec& x, const ControlVec& u) const {
  return fx_ * x + fu_ * u;
}

void LinearPlant::driftJacobians(const StateVec&, const ControlVec&, Eigen::MatrixXd& fx,
                                 Eigen::MatrixXd& fu) const {
  fx = fx_;
  fu = fu_;
}

namespace {

void checkDims(const PlantModel& model, const StateVec& x, const ControlVec& u) {
  if (x.size() != model.stateDim() || u.size() != model.controlDim()) {
    throw DimensionError("state/control dimension does not match the plant");
  }
}

}  // namespace

StateVec step(const PlantModel& model, const StateVec& x, const ControlVec& u, const NoiseVec& w) {
  checkDims(model, x, u);
  if (w.size() != model.stateDim()) {
    throw DimensionError("noise dimension must equal the state dimension");
  }
  StateVec next = x + model.drift(x, u) * model.dt() + w;
  if (!next.allFinite()) {
    throw NumericalFault("plant step produced a non-finite state");
  }
  return next;
}

StateVec step(const PlantModel& model, const StateVec& x, const ControlVec& u) {
  return step(model, x, u, NoiseVec::Zero(model.stateDim()));
}

Linearization linearize(const PlantModel& model, const StateVec& x_nom, const ControlVec& u_nom) {
  checkDims(model, x_nom, u_nom);
  if (!x_nom.allFinite() || !u_nom.allFinite()) {
    throw NumericalFault("linearize: non-finite nominal point");
  }
  model.checkControl(u_nom);
  Eigen::MatrixXd fx;
  Eigen::MatrixXd fu;
  model.driftJacobians(x_nom, u_nom, fx, fu);
  Linearization lin;
  lin.A = Eigen::MatrixXd::Identity(model.stateDim(), model.stateDim()) + model.dt() * fx;
  lin.B = model.dt() * fu;
  return lin;
}

}  // namespace droc
