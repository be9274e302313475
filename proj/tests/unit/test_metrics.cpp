#include <chrono>
#include <cmath>

#include <gtest/gtest.h>

#include "builders.hpp"
#include "epsilon_oracle.hpp"
#include "graspforge/kinematics/robot.hpp"
#include "graspforge/planner/metrics.hpp"

using namespace graspforge;
using namespace graspforge::testing;

namespace
{

Eigen::Vector3d random_unit(Rng& rng)
{
  while (true)
  {
    Eigen::Vector3d v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (v.norm() > 0.1 && v.norm() <= 1.0)
    {
      return v.normalized();
    }
  }
}

/// Contacts on a sphere about com, normals pointing roughly inward.
ContactSet random_contacts(Rng& rng, int count, double mu)
{
  ContactSet s;
  s.mu = mu;
  s.com = Eigen::Vector3d(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
  for (int i = 0; i < count; ++i)
  {
    const Eigen::Vector3d dir = random_unit(rng);
    s.points.push_back(s.com + rng.uniform(0.02, 0.08) * dir);
    s.normals.push_back((-dir + 0.4 * random_unit(rng)).normalized());
  }
  return s;
}

double oracle(const ContactSet& s, int m)
{
  return oracle_epsilon(oracle_wrenches(s.points, s.normals, s.mu, s.com, m));
}

}  // namespace

TEST(FrictionCone, EdgesLieOnTheConeBoundary)
{
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial)
  {
    const Eigen::Vector3d n = random_unit(rng);
    const double mu = rng.uniform(0.05, 1.5);
    const auto edges = friction_cone_edges(n, mu, 8);
    ASSERT_EQ(edges.size(), 8u);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& e : edges)
    {
      EXPECT_NEAR(e.norm(), 1.0, 1e-12);
      EXPECT_NEAR(std::acos(std::clamp(e.dot(n), -1.0, 1.0)), std::atan(mu), 1e-9);
      sum += e;
    }
    // symmetric spacing: the edges average onto the axis
    EXPECT_NEAR(sum.normalized().dot(n), 1.0, 1e-12);
    const auto expected = oracle_cone_edges(n, mu, 8);
    for (int j = 0; j < 8; ++j)
    {
      EXPECT_LT((edges[j] - expected[j]).norm(), 1e-12);
    }
  }
}

TEST(FrictionCone, ZeroFrictionCollapsesToTheNormal)
{
  for (const auto& e : friction_cone_edges(Eigen::Vector3d::UnitZ(), 0.0, 6))
  {
    EXPECT_LT((e - Eigen::Vector3d::UnitZ()).norm(), 1e-15);
  }
}

TEST(Wrenches, TorqueIsScaledByTheLargestLeverArm)
{
  ContactSet s;
  s.mu = 0.0;
  s.points = {Eigen::Vector3d(0.1, 0, 0), Eigen::Vector3d(0, 0.05, 0)};
  s.normals = {-Eigen::Vector3d::UnitY(), -Eigen::Vector3d::UnitX()};
  const auto w = primitive_wrenches(s, 4);
  ASSERT_EQ(w.size(), 8u);
  // r x f = (0.1,0,0) x (0,-1,0) = (0,0,-0.1); rho = 0.1
  EXPECT_LT((w[0].tail<3>() - Eigen::Vector3d(0, 0, -1)).norm(), 1e-12);
  // (0,0.05,0) x (-1,0,0) = (0,0,0.05)
  EXPECT_LT((w[4].tail<3>() - Eigen::Vector3d(0, 0, 0.5)).norm(), 1e-12);
}

TEST(Epsilon, MatchesBruteForceOracle)
{
  Rng rng(2024);
  int positive = 0;
  for (int trial = 0; trial < 12; ++trial)
  {
    const int count = 3 + trial % 2;
    const ContactSet s = random_contacts(rng, count, rng.uniform(0.1, 1.0));
    const double eps = force_closure_epsilon(s, 8);
    const double expected = oracle(s, 8);
    EXPECT_NEAR(eps, expected, 1e-6) << "trial " << trial;
    positive += expected > 0;
  }
  // the generator must exercise the interesting branch
  EXPECT_GE(positive, 4);
}

TEST(Epsilon, SingleContactHasNoClosure)
{
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial)
  {
    const ContactSet s = random_contacts(rng, 1, rng.uniform(0.1, 1.0));
    EXPECT_EQ(force_closure_epsilon(s, 8), 0.0);
  }
}

TEST(Epsilon, FrictionlessOpposedPairHasNoClosure)
{
  ContactSet s;
  s.mu = 0.0;
  s.points = {Eigen::Vector3d(0.02, 0, 0), Eigen::Vector3d(-0.02, 0, 0)};
  s.normals = {-Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX()};
  EXPECT_EQ(force_closure_epsilon(s, 8), 0.0);
}

TEST(Epsilon, TwoPointContactsCannotResistTwistAboutTheirLine)
{
  // the torque about the contact line is zero for every primitive wrench
  ContactSet s;
  s.mu = 1.0;
  s.points = {Eigen::Vector3d(0.02, 0, 0), Eigen::Vector3d(-0.02, 0, 0)};
  s.normals = {-Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitX()};
  EXPECT_EQ(force_closure_epsilon(s, 8), 0.0);
  EXPECT_EQ(oracle(s, 8), 0.0);
}

TEST(Epsilon, FourPatchContactsOnACubeAreInClosure)
{
  ContactSet s;
  s.mu = 0.5;
  for (double side : {1.0, -1.0})
  {
    for (double z : {0.01, -0.01})
    {
      s.points.emplace_back(0.02 * side, 0, z);
      s.normals.emplace_back(-side, 0, 0);
    }
  }
  const double eps = force_closure_epsilon(s, 8);
  EXPECT_GT(eps, 0.0);
  EXPECT_NEAR(eps, oracle(s, 8), 1e-6);
}

TEST(Epsilon, InvariantUnderTranslationAndScale)
{
  Rng rng(77);
  for (int trial = 0; trial < 6; ++trial)
  {
    ContactSet s = random_contacts(rng, 4, 0.7);
    const double eps = force_closure_epsilon(s, 8);
    ContactSet moved = s;
    const Eigen::Vector3d t(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const double k = rng.uniform(0.2, 5.0);
    moved.com = k * s.com + t;
    for (auto& p : moved.points)
    {
      p = k * p + t;
    }
    EXPECT_NEAR(force_closure_epsilon(moved, 8), eps, 1e-9);
  }
}

TEST(Epsilon, AddingAnInnerContactNeverLowersQuality)
{
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial)
  {
    ContactSet s = random_contacts(rng, 3, 0.6);
    const double before = force_closure_epsilon(s, 8);
    double rho = 0.0;
    for (const auto& p : s.points)
    {
      rho = std::max(rho, (p - s.com).norm());
    }
    // the extra contact stays inside the current lever-arm radius so the
    // torque scale is unchanged and the wrench set only grows
    const Eigen::Vector3d dir = random_unit(rng);
    s.points.push_back(s.com + 0.5 * rho * dir);
    s.normals.push_back(-dir);
    EXPECT_GE(force_closure_epsilon(s, 8), before - 1e-12);
  }
}

TEST(Epsilon, RejectsInvalidInput)
{
  ContactSet s;
  EXPECT_THROW(force_closure_epsilon(s, 8), std::invalid_argument);
  s.points = {Eigen::Vector3d::Zero()};
  s.normals = {Eigen::Vector3d(2, 0, 0)};
  EXPECT_THROW(force_closure_epsilon(s, 8), std::invalid_argument);
  s.normals = {Eigen::Vector3d::UnitX()};
  s.mu = -0.1;
  EXPECT_THROW(force_closure_epsilon(s, 8), std::invalid_argument);
  s.mu = 0.5;
  EXPECT_THROW(force_closure_epsilon(s, 2), std::invalid_argument);
}

TEST(Epsilon, GraspContactsAreFlippedInward)
{
  Grasp g;
  g.contacts.push_back({Eigen::Vector3d(0.02, 0, 0), Eigen::Vector3d(1, 0, 0), 0, 0});
  const ContactSet s = contact_set(g, Eigen::Vector3d::Zero(), 0.3);
  EXPECT_EQ(s.normals[0], Eigen::Vector3d(-1, 0, 0));
  EXPECT_EQ(s.mu, 0.3);
}

TEST(CapabilityTerm, PlanarArmMatchesInverseJacobian)
{
  const KinematicChain arm = planar_arm(2, 1.0);
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial)
  {
    Eigen::VectorXd q(2);
    q << rng.uniform(-M_PI, M_PI), rng.uniform(0.3, 2.8);
    const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
    const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
    Eigen::Matrix2d j;
    j << -s1 - s12, -s12, c1 + c12, c12;
    const double a = rng.uniform(0, 2 * M_PI);
    const Eigen::Vector2d u(std::cos(a), std::sin(a));
    const double expected = 1.0 / (j.inverse() * u).norm();

    const Pose from = Pose::translation(Eigen::Vector3d(0.3, 0.1, 0));
    const Pose to = Pose::translation(from.position + 0.05 * Eigen::Vector3d(u.x(), u.y(), 0));
    EXPECT_NEAR(capability_term(arm, q, Pose(), from, to, 0.2), expected, 1e-9);
  }
}

TEST(CapabilityTerm, SixAxisArmMatchesFiniteDifferenceJacobian)
{
  const Robot robot = load_robot(fixture("robots/ref6.json"));
  const auto& arm = robot.arm;
  const Pose tcp_in_tip(Eigen::Vector3d(0.01, 0.02, 0.15), Eigen::Quaterniond::Identity());
  const double length = 0.2;
  Rng rng(90);
  for (int trial = 0; trial < 10; ++trial)
  {
    Eigen::VectorXd q(6);
    for (int i = 0; i < 6; ++i)
    {
      q[i] = rng.uniform(-2.5, 2.5);
    }
    // TCP twist Jacobian by central differences: linear rows from positions,
    // angular rows from the world-frame rotation vector of the increment
    Eigen::Matrix<double, 6, 6> j;
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i)
    {
      Eigen::VectorXd qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const Pose a = arm.forward(qp) * tcp_in_tip;
      const Pose b = arm.forward(qm) * tcp_in_tip;
      const Eigen::AngleAxisd d(a.orientation * b.orientation.inverse());
      j.col(i) << (a.position - b.position) / (2 * h), length * d.angle() * d.axis() / (2 * h);
    }
    const Pose from = arm.forward(q) * tcp_in_tip;
    const Eigen::Vector3d dp(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    const Eigen::Vector3d dw(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const Pose to(from.position + dp, Eigen::Quaterniond(Eigen::AngleAxisd(dw.norm(), dw.normalized())) *
                                          from.orientation);
    Eigen::Matrix<double, 6, 1> u;
    u << dp, length * dw;
    u.normalize();
    const Eigen::Matrix<double, 6, 6> m = j * j.transpose();
    if (std::abs(m.determinant()) < 1e-10)
    {
      continue;
    }
    const double expected = 1.0 / std::sqrt(u.dot(m.inverse() * u));
    EXPECT_NEAR(capability_term(arm, q, tcp_in_tip, from, to, length), expected, 1e-5 * std::max(1.0, expected));
  }
}

TEST(CapabilityTerm, NoMotionScoresZero)
{
  const KinematicChain arm = planar_arm(3, 1.0);
  const Eigen::VectorXd q = Eigen::VectorXd::Constant(3, 0.4);
  const Pose p = Pose::from_xyz_rpy(Eigen::Vector3d(1, 1, 0), Eigen::Vector3d(0, 0, 0.3));
  EXPECT_EQ(capability_term(arm, q, Pose(), p, p, 0.2), 0.0);
}
