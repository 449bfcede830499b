#pragma once

#include <Eigen/Dense>

namespace droc {

/// Robot state [x, y, theta, v] for the car model; generic length for other plants.
using StateVec = Eigen::VectorXd;
/// Control input [a, delta] for the car model.
using ControlVec = Eigen::VectorXd;
/// Additive process noise, one entry per state component.
using NoiseVec = Eigen::VectorXd;

/// Index names for the car-like robot vectors.
namespace car {
inline constexpr int kX = 0;
inline constexpr int kY = 1;
inline constexpr int kYaw = 2;
inline constexpr int kSpeed = 3;
inline constexpr int kAccel = 0;
inline constexpr int kSteer = 1;
}  // namespace car

/// Discrete-step Jacobians of x_{t+1} = x_t + f(x_t, u_t) dt + w_t.
struct Linearization {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

/**
 * Continuous-time plant x' = f(x, u) integrated with a forward-Euler step and
 * additive noise. The noise map is the identity, so the noise dimension equals
 * the state dimension.
 */
class PlantModel {
 public:
  PlantModel(int state_dim, int control_dim, double dt);
  virtual ~PlantModel() = default;

  int stateDim() const { return state_dim_; }
  int controlDim() const { return control_dim_; }
  double dt() const { return dt_; }

  /// Drift f(x, u).
  virtual Eigen::VectorXd drift(const StateVec& x, const ControlVec& u) const = 0;

  /// Analytic partial derivatives of the drift, df/dx and df/du.
  virtual void driftJacobians(const StateVec& x, const ControlVec& u, Eigen::MatrixXd& fx,
                              Eigen::MatrixXd& fu) const = 0;

  /// Throws SingularLinearization when u lies on a model singularity.
  virtual void checkControl(const ControlVec& /*u*/) const {}

 private:
  int state_dim_;
  int control_dim_;
  double dt_;
};

/// Kinematic bicycle: x' = v cos(yaw), y' = v sin(yaw), yaw' = v tan(delta) / L, v' = a.
class KinematicBicycle final : public PlantModel {
 public:
  explicit KinematicBicycle(double wheelbase = 0.3, double dt = 0.1);

  double wheelbase() const { return wheelbase_; }

  Eigen::VectorXd drift(const StateVec& x, const ControlVec& u) const override;
  void driftJacobians(const StateVec& x, const ControlVec& u, Eigen::MatrixXd& fx,
                      Eigen::MatrixXd& fu) const override;
  void checkControl(const ControlVec& u) const override;

 private:
  double wheelbase_;
};

/// Discrete linear system x+ = A x + B u + w, expressed as an Euler plant.
class LinearPlant final : public PlantModel {
 public:
  LinearPlant(Eigen::MatrixXd A, Eigen::MatrixXd B, double dt = 1.0);

  Eigen::VectorXd drift(const StateVec& x, const ControlVec& u) const override;
  void driftJacobians(const StateVec& x, const ControlVec& u, Eigen::MatrixXd& fx,
                      Eigen::MatrixXd& fu) const override;

 private:
  Eigen::MatrixXd fx_;
  Eigen::MatrixXd fu_;
};

/// x + f(x, u) dt + w. Throws NumericalFault on a non-finite result.
StateVec step(const PlantModel& model, const StateVec& x, const ControlVec& u, const NoiseVec& w);

/// Noise-free step.
StateVec step(const PlantModel& model, const StateVec& x, const ControlVec& u);

/// A = I + dt df/dx, B = dt df/du at the nominal point.
Linearization linearize(const PlantModel& model, const StateVec& x_nom, const ControlVec& u_nom);

}  // namespace droc
