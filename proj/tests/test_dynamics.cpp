#include <doctest.h>

#include <cmath>
#include <numbers>

#include "droc/dynamics.hpp"
#include "droc/errors.hpp"

using namespace droc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("bicycle step: rest state stays put") {
  const KinematicBicycle car;
  const auto x1 = step(car, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2));
  CHECK(x1.isZero(0.0));
}

TEST_CASE("bicycle step: straight-line motion along x and y") {
  const KinematicBicycle car(0.3, 0.1);
  const auto x1 = step(car, vec({0, 0, 0, 1}), vec({0, 0}));
  CHECK(x1(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(x1(1) == 0.0);
  CHECK(x1(2) == 0.0);
  CHECK(x1(3) == 1.0);

  const double half_pi = std::numbers::pi / 2;
  const auto x2 = step(car, vec({0, 0, half_pi, 1}), vec({0, 0}));
  CHECK(std::abs(x2(0)) <= 1e-12);
  CHECK(std::abs(x2(1) - 0.1) <= 1e-12);
  CHECK(x2(2) == half_pi);
  CHECK(x2(3) == 1.0);
}

TEST_CASE("bicycle step: hand-evaluated turn and acceleration") {
  const KinematicBicycle car(0.3, 0.1);
  const Eigen::VectorXd x = vec({1.0, -2.0, 0.4, 2.0});
  const Eigen::VectorXd u = vec({0.5, 0.2});
  const auto x1 = step(car, x, u);
  CHECK(x1(0) == doctest::Approx(1.0 + 0.1 * 2.0 * std::cos(0.4)));
  CHECK(x1(1) == doctest::Approx(-2.0 + 0.1 * 2.0 * std::sin(0.4)));
  CHECK(x1(2) == doctest::Approx(0.4 + 0.1 * 2.0 * std::tan(0.2) / 0.3));
  CHECK(x1(3) == doctest::Approx(2.05));
}

TEST_CASE("bicycle step: yaw is not wrapped") {
  const KinematicBicycle car(0.3, 0.1);
  const auto x1 = step(car, vec({0, 0, 3.1, 3.0}), vec({0, 0.5}));
  CHECK(x1(2) > std::numbers::pi);
}

TEST_CASE("additive noise enters the step unchanged") {
  const KinematicBicycle car;
  const Eigen::VectorXd x = vec({0.3, 0.7, -1.1, 0.9});
  const Eigen::VectorXd u = vec({0.2, -0.1});
  const Eigen::VectorXd w = vec({1e-2, -3e-3, 5e-4, 2e-2});
  CHECK((step(car, x, u, w) - step(car, x, u) - w).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("step rejects mismatched dimensions and non-finite results") {
  const KinematicBicycle car;
  CHECK_THROWS_AS(step(car, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)), DimensionError);
  CHECK_THROWS_AS(step(car, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(3)), DimensionError);
  CHECK_THROWS_AS(step(car, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)),
                  DimensionError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
  bad(0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(step(car, bad, Eigen::VectorXd::Zero(2)), NumericalFault);
}

TEST_CASE("plant construction rejects invalid parameters") {
  CHECK_THROWS_AS(KinematicBicycle(0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(KinematicBicycle(0.3, -0.1), InvalidArgument);
  CHECK_THROWS_AS(LinearPlant(Eigen::MatrixXd::Identity(2, 3), Eigen::MatrixXd::Zero(2, 1)),
                  DimensionError);
  CHECK_THROWS_AS(LinearPlant(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Zero(3, 1)),
                  DimensionError);
}

TEST_CASE("linearize at rest: A[0][3] = dt cos(yaw), B[3][0] = dt") {
  const KinematicBicycle car(0.3, 0.1);
  const auto lin = linearize(car, vec({0, 0, 0.3, 0}), vec({0, 0}));
  CHECK(lin.A(0, 3) == doctest::Approx(0.1 * std::cos(0.3)));
  CHECK(lin.A(1, 3) == doctest::Approx(0.1 * std::sin(0.3)));
  CHECK(lin.B(3, 0) == doctest::Approx(0.1));
  CHECK(lin.B(2, 1) == 0.0);  // zero speed: steering has no effect
}

TEST_CASE("linearize with dt = 0 gives A = I, B = 0") {
  const KinematicBicycle car(0.3, 0.0);
  const auto lin = linearize(car, vec({1, 2, 0.5, 1.5}), vec({0.3, 0.2}));
  CHECK(lin.A.isIdentity(0.0));
  CHECK(lin.B.isZero(0.0));
}

TEST_CASE("analytic Jacobians agree with central differences") {
  const KinematicBicycle car(0.3, 0.1);
  const Eigen::VectorXd x = vec({0.4, -0.2, 0.9, 1.3});
  const Eigen::VectorXd u = vec({0.3, 0.25});
  const auto lin = linearize(car, x, u);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
    e(i) = h;
    const Eigen::VectorXd col = (step(car, x + e, u) - step(car, x - e, u)) / (2 * h);
    CHECK((lin.A.col(i) - col).cwiseAbs().maxCoeff() <= 1e-8);
  }
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e(i) = h;
    const Eigen::VectorXd col = (step(car, x, u + e) - step(car, x, u - e)) / (2 * h);
    CHECK((lin.B.col(i) - col).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("linearize refuses steering on the tangent singularity") {
  const KinematicBicycle car;
  CHECK_THROWS_AS(linearize(car, Eigen::VectorXd::Zero(4), vec({0, std::numbers::pi / 2})),
                  SingularLinearization);
  CHECK_THROWS_AS(linearize(car, Eigen::VectorXd::Zero(4), vec({0, -2.0})), SingularLinearization);
  CHECK_NOTHROW(linearize(car, Eigen::VectorXd::Zero(4), vec({0, 1.5})));
}

TEST_CASE("linear plant reproduces x+ = A x + B u") {
  Eigen::MatrixXd A(2, 2);
  A << 1.0, 0.1, -0.2, 0.9;
  Eigen::MatrixXd B(2, 1);
  B << 0.0, 0.1;
  const LinearPlant plant(A, B);
  const Eigen::VectorXd x = vec({0.5, -1.0});
  const Eigen::VectorXd u = vec({2.0});
  CHECK((step(plant, x, u) - (A * x + B * u)).cwiseAbs().maxCoeff() <= 1e-15);
  const auto lin = linearize(plant, x, u);
  CHECK((lin.A - A).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((lin.B - B).cwiseAbs().maxCoeff() <= 1e-15);
}
