#include <doctest.h>

#include <random>
#include <vector>

#include "droc/cost_model.hpp"
#include "droc/errors.hpp"

using namespace droc;

namespace {

QuadCost unitCost(int horizon = 1) {
  return QuadCost::diagonal(Eigen::VectorXd::Ones(4), Eigen::VectorXd::Ones(2),
                            Eigen::VectorXd::Ones(4), horizon);
}

// ½ Σ_ij x_i M_ij x_j by explicit loops.
double quadSum(const Eigen::MatrixXd& M, const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += x(i) * M(i, j) * x(j);
  }
  return 0.5 * acc;
}

}  // namespace

TEST_CASE("stage cost of the origin is zero") {
  CHECK(stageCost(unitCost(), Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2)) == 0.0);
}

TEST_CASE("unit quadratic stage cost") {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  x(0) = 1.0;
  CHECK(stageCost(unitCost(), x, Eigen::VectorXd::Zero(2)) == 0.5);
}

TEST_CASE("stage cost matches elementwise summation for dense weights") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd F = Eigen::MatrixXd::NullaryExpr(4, 4, [&] { return nd(gen); });
    Eigen::MatrixXd G = Eigen::MatrixXd::NullaryExpr(2, 2, [&] { return nd(gen); });
    QuadCost c;
    c.Q = F * F.transpose();
    c.R = G * G.transpose() + Eigen::MatrixXd::Identity(2, 2);
    c.Qf = c.Q;
    c.validate();
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(4, [&] { return nd(gen); });
    const Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(2, [&] { return nd(gen); });
    CHECK(std::abs(stageCost(c, x, u) - quadSum(c.Q, x) - quadSum(c.R, u)) <= 1e-12);
  }
}

TEST_CASE("total cost: zero trajectory, terminal-only and re-summation") {
  const QuadCost c1 = unitCost(1);
  const std::vector<StateVec> zs(1, Eigen::VectorXd::Zero(4));
  const std::vector<ControlVec> zu(1, Eigen::VectorXd::Zero(2));
  CHECK(totalCost(c1, zs, zu, Eigen::VectorXd::Zero(4)) == 0.0);
  Eigen::VectorXd xf = Eigen::VectorXd::Zero(4);
  xf(0) = 1.0;
  CHECK(totalCost(c1, zs, zu, xf) == 0.5);

  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  const QuadCost c = QuadCost::diagonal(Eigen::Vector4d(1, 2, 0.1, 0.3), Eigen::Vector2d(0.1, 0.5),
                                        Eigen::Vector4d(10, 10, 1, 1), 7);
  std::vector<StateVec> xs;
  std::vector<ControlVec> us;
  double expected = 0.0;
  for (int t = 0; t < 7; ++t) {
    xs.push_back(Eigen::VectorXd::NullaryExpr(4, [&] { return nd(gen); }));
    us.push_back(Eigen::VectorXd::NullaryExpr(2, [&] { return nd(gen); }));
    expected += quadSum(c.Q, xs.back()) + quadSum(c.R, us.back());
  }
  const Eigen::VectorXd x_final = Eigen::VectorXd::NullaryExpr(4, [&] { return nd(gen); });
  expected += quadSum(c.Qf, x_final);
  CHECK(std::abs(totalCost(c, xs, us, x_final) - expected) <= 1e-12 * std::max(1.0, expected));
}

TEST_CASE("total cost rejects a length mismatch") {
  const QuadCost c = unitCost(3);
  const std::vector<StateVec> xs(2, Eigen::VectorXd::Zero(4));
  const std::vector<ControlVec> us(3, Eigen::VectorXd::Zero(2));
  CHECK_THROWS_AS(totalCost(c, xs, us, Eigen::VectorXd::Zero(4)), DimensionError);
}

TEST_CASE("expansion gradients are linear maps of the nominal") {
  QuadCost c = unitCost();
  auto e0 = expand(c, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(2));
  CHECK(e0.q_vec.isZero(0.0));
  CHECK(e0.r_vec.isZero(0.0));

  c.R = Eigen::Vector2d(2.0, 3.0).asDiagonal();
  const auto e1 = expand(c, Eigen::VectorXd::Zero(4), Eigen::Vector2d(1.0, 0.0));
  CHECK(e1.r_vec(0) == 2.0);
  CHECK(e1.r_vec(1) == 0.0);

  const Eigen::Vector4d x(0.3, -1.2, 2.0, 0.5);
  const auto e2 = expand(c, x, Eigen::Vector2d(0.4, -0.7));
  CHECK(e2.q_vec == c.Q * x);
  CHECK(e2.value == stageCost(c, x, Eigen::Vector2d(0.4, -0.7)));
  CHECK(e2.Q_mat == c.Q);
  CHECK(e2.R_mat == c.R);

  const auto term = expandTerminal(c, x);
  CHECK(term.S == c.Qf);
  CHECK(term.s_vec == c.Qf * x);
  CHECK(term.s_scalar == terminalCost(c, x));
}

TEST_CASE("cost validation") {
  CHECK_THROWS_AS(QuadCost::diagonal(Eigen::Vector4d(1, 1, -1, 1), Eigen::Vector2d(1, 1),
                                     Eigen::Vector4d::Ones(), 1),
                  InvalidArgument);
  CHECK_THROWS_AS(QuadCost::diagonal(Eigen::Vector4d::Ones(), Eigen::Vector2d(1, 0),
                                     Eigen::Vector4d::Ones(), 1),
                  InvalidArgument);
  CHECK_THROWS_AS(QuadCost::diagonal(Eigen::Vector4d::Ones(), Eigen::Vector2d(1, 1),
                                     Eigen::Vector3d::Ones(), 1),
                  DimensionError);
  CHECK_THROWS_AS(QuadCost::diagonal(Eigen::Vector4d::Ones(), Eigen::Vector2d(1, 1),
                                     Eigen::Vector4d::Ones(), 0),
                  InvalidArgument);
  QuadCost c = unitCost();
  c.Q(0, 1) = 0.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK_THROWS_AS(stageCost(unitCost(), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)),
                  DimensionError);
}
