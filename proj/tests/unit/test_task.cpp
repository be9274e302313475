#include <gtest/gtest.h>

#include "builders.hpp"
#include "graspforge/geometry/mesh_io.hpp"
#include "graspforge/geometry/primitives.hpp"
#include "graspforge/task/task.hpp"

using namespace graspforge;
using namespace graspforge::testing;

namespace
{

const Robot& ref6()
{
  static const Robot robot = load_robot(fixture("robots/ref6.json"));
  return robot;
}

nlohmann::json minimal_task()
{
  nlohmann::json start = nlohmann::json::object();
  for (const auto& j : ref6().arm.joints())
  {
    start[j.name] = 0.0;
  }
  return {{"ee_group", "parallel_gripper"},
          {"object", {{"geometry", {{"type", "box"}, {"dimensions", {0.04, 0.04, 0.04}}}}}},
          {"steps", {{{"xyz", {0.4, 0.0, 0.2}}}}},
          {"start_arm_config", start}};
}

template <typename E>
std::string error_path(const nlohmann::json& doc)
{
  try
  {
    parse_task(doc, ref6(), fixture("tasks"));
  }
  catch (const E& e)
  {
    return e.path();
  }
  return "<no error>";
}

void expect_pose_near(const Pose& a, const Pose& b, double tol)
{
  EXPECT_LT((a.position - b.position).norm(), tol);
  EXPECT_LT(angular_distance(a.orientation, b.orientation), tol);
}

}  // namespace

TEST(TaskParse, MinimalTaskHasOneStepAndZeroTolerances)
{
  const TaskDescription t = parse_task(minimal_task(), ref6(), ".");
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].tol_pos, Eigen::Vector3d::Zero());
  EXPECT_EQ(t.steps[0].tol_rot, Eigen::Vector3d::Zero());
  EXPECT_EQ(t.ee_group, "parallel_gripper");
  EXPECT_EQ(t.object.mesh.num_faces(), 12u);
}

TEST(TaskParse, PourThirdStepIsTheSecondTurnedAboutObjectX)
{
  const TaskDescription t = load_task(fixture("tasks/pour.json"), ref6());
  ASSERT_EQ(t.steps.size(), 3u);
  const Pose rel = t.steps[1].pose.inverse() * t.steps[2].pose;
  const Eigen::AngleAxisd aa(rel.orientation);
  EXPECT_NEAR(aa.angle(), M_PI / 2, 1e-9);
  EXPECT_NEAR(std::abs(aa.axis().x()), 1.0, 1e-9);
  EXPECT_LT(rel.position.norm(), 1e-12);
}

TEST(TaskParse, PaintingTracesASquareWithMillimetreTolerances)
{
  const TaskDescription t = load_task(fixture("tasks/painting.json"), ref6());
  ASSERT_EQ(t.steps.size(), 5u);
  for (const auto& s : t.steps)
  {
    EXPECT_EQ(s.tol_pos, Eigen::Vector3d(0.001, 0.001, 0.0));
    EXPECT_EQ(s.tol_rot, Eigen::Vector3d::Zero());
  }
  // four equal sides at right angles, closing on the first corner
  for (int k = 0; k < 4; ++k)
  {
    const Eigen::Vector3d a = t.steps[k + 1].pose.position - t.steps[k].pose.position;
    EXPECT_NEAR(a.norm(), 0.2, 1e-12);
    if (k < 3)
    {
      const Eigen::Vector3d b = t.steps[k + 2].pose.position - t.steps[k + 1].pose.position;
      EXPECT_NEAR(a.dot(b), 0.0, 1e-12);
    }
  }
  EXPECT_EQ(t.steps[0].pose.position, t.steps[4].pose.position);
}

TEST(TaskParse, EveryShippedFixtureLoads)
{
  for (const char* name : {"cube", "painting", "pour", "handover", "cheezit", "goblet", "infeasible"})
  {
    EXPECT_NO_THROW(load_task(fixture(std::string("tasks/") + name + ".json"), ref6())) << name;
  }
}

TEST(TaskParse, GobletMeshIsClosed)
{
  const TriMesh goblet = load_mesh(fixture("meshes/goblet.obj"));
  EXPECT_TRUE(goblet.is_watertight());
  EXPECT_GT(goblet.signed_volume(), 0.0);
  // widest at the rim: 7.6 cm fits the 9.2 cm opening
  const auto box = goblet.bounds();
  EXPECT_NEAR(box.sizes().x(), 0.076, 1e-3);
  EXPECT_NEAR(box.sizes().z(), 0.14, 1e-9);
}

TEST(TaskErrors, EachFailureHasItsOwnTypeAndPath)
{
  auto doc = minimal_task();
  doc["object"]["geometry"] = {{"type", "mesh"}, {"file", "nowhere.obj"}};
  EXPECT_EQ(error_path<MissingMeshError>(doc), "/object/geometry/file");

  doc = minimal_task();
  doc["ee_group"] = "suction_cup";
  EXPECT_EQ(error_path<UnknownEndEffectorError>(doc), "/ee_group");

  doc = minimal_task();
  doc["tol_pos"] = {{0.0, -0.01, 0.0}};
  EXPECT_EQ(error_path<NegativeToleranceError>(doc), "/tol_pos/0/1");

  doc = minimal_task();
  doc["tol_rot"] = {{0, 0, 0}, {0, 0, 0}};
  EXPECT_EQ(error_path<SchemaError>(doc), "/tol_rot");

  doc = minimal_task();
  doc["object"]["geometry"] = {{"type", "inline"}, {"vertices", nlohmann::json::array()},
                               {"faces", nlohmann::json::array()}};
  EXPECT_EQ(error_path<InvalidObjectError>(doc).rfind("/object", 0), 0u);

  doc = minimal_task();
  doc.erase("steps");
  EXPECT_EQ(error_path<SchemaError>(doc), "/steps");

  doc = minimal_task();
  doc["start_arm_config"]["gripper_roll"] = 0.0;
  EXPECT_EQ(error_path<SchemaError>(doc).rfind("/start_arm_config", 0), 0u);

  doc = minimal_task();
  doc["start_arm_config"]["elbow"] = 7.0;
  EXPECT_EQ(error_path<SchemaError>(doc).rfind("/start_arm_config", 0), 0u);

  doc = minimal_task();
  doc["steps"][0]["quat"] = {0, 0, 0, 0};
  EXPECT_EQ(error_path<SchemaError>(doc), "/steps/0/quat");
}

TEST(TaskParse, RpyAndQuaternionInputsAgree)
{
  auto a = minimal_task();
  a["steps"][0]["rpy"] = {0.1, -0.2, 0.3};
  auto b = minimal_task();
  const Eigen::Quaterniond q = Pose::from_xyz_rpy(Eigen::Vector3d::Zero(), Eigen::Vector3d(0.1, -0.2, 0.3)).orientation;
  // unnormalized on input; the parser normalizes
  b["steps"][0]["quat"] = {2 * q.x(), 2 * q.y(), 2 * q.z(), 2 * q.w()};
  expect_pose_near(parse_task(a, ref6(), ".").steps[0].pose, parse_task(b, ref6(), ".").steps[0].pose, 1e-12);
}

TEST(TaskRoundTrip, SerializeThenParseIsIdentity)
{
  Rng rng(41);
  for (int trial = 0; trial < 25; ++trial)
  {
    TaskDescription t;
    t.ee_group = "parallel_gripper";
    const Eigen::Vector3d dims(rng.uniform(0.01, 0.2), rng.uniform(0.01, 0.2), rng.uniform(0.01, 0.2));
    t.object = ObjectInfo::from_mesh(make_box(dims), random_pose(rng, 0.5));
    const int n = 1 + static_cast<int>(rng.uniform(0, 6));
    for (int k = 0; k < n; ++k)
    {
      TolerancedStep s;
      s.pose = random_pose(rng, 0.8);
      s.tol_pos = Eigen::Vector3d(rng.uniform(0, 0.05), rng.uniform(0, 0.05), 0.0);
      s.tol_rot = Eigen::Vector3d(rng.uniform(0, 0.5), 0.0, rng.uniform(0, 0.5));
      t.steps.push_back(s);
    }
    for (const auto& j : ref6().arm.joints())
    {
      t.start_arm_config[j.name] = rng.uniform(j.lower, j.upper);
    }

    const nlohmann::json doc = serialize_task(t);
    const TaskDescription back = parse_task(nlohmann::json::parse(doc.dump()), ref6(), ".");
    EXPECT_EQ(back.ee_group, t.ee_group);
    EXPECT_EQ(back.object.digest, t.object.digest);
    expect_pose_near(back.object.pose, t.object.pose, 1e-12);
    ASSERT_EQ(back.steps.size(), t.steps.size());
    for (std::size_t k = 0; k < t.steps.size(); ++k)
    {
      expect_pose_near(back.steps[k].pose, t.steps[k].pose, 1e-12);
      EXPECT_EQ(back.steps[k].tol_pos, t.steps[k].tol_pos);
      EXPECT_EQ(back.steps[k].tol_rot, t.steps[k].tol_rot);
    }
    EXPECT_EQ(back.start_arm_config, t.start_arm_config);
    // a second pass is a fixed point
    const nlohmann::json again = serialize_task(back);
    EXPECT_EQ(serialize_task(parse_task(again, ref6(), ".")).dump(), again.dump());
  }
}

TEST(TcpWorldPose, ComposesStepThenGrasp)
{
  Grasp g;
  g.tcp_in_object = Pose::translation(Eigen::Vector3d(0, 1, 0));
  const Pose w = tcp_world_pose(Pose::translation(Eigen::Vector3d(1, 0, 0)), g);
  EXPECT_LT((w.position - Eigen::Vector3d(1, 1, 0)).norm(), 1e-15);

  Rng rng(6);
  const Pose p = random_pose(rng);
  g.tcp_in_object = Pose();
  expect_pose_near(tcp_world_pose(p, g), p, 1e-15);
  g.tcp_in_object = p;
  expect_pose_near(tcp_world_pose(Pose(), g), p, 1e-15);
}

TEST(TcpWorldPose, AssociativeWithComposition)
{
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial)
  {
    const Pose a = random_pose(rng, 2.0);
    const Pose b = random_pose(rng, 2.0);
    Grasp g;
    g.tcp_in_object = random_pose(rng, 0.2);
    expect_pose_near(tcp_world_pose(a * b, g), a * tcp_world_pose(b, g), 1e-12);
  }
}

TEST(UpdateObject, KeepsStepsAndSwapsGeometry)
{
  const TaskDescription cheezit = load_task(fixture("tasks/cheezit.json"), ref6());
  const ObjectInfo goblet =
      parse_object({{"geometry", {{"type", "mesh"}, {"file", "goblet.obj"}}}}, fixture("meshes"), "/object");
  const TaskDescription swapped = update_object(cheezit, goblet);
  EXPECT_EQ(serialize_task(swapped)["steps"].dump(), serialize_task(cheezit)["steps"].dump());
  EXPECT_EQ(serialize_task(swapped)["tol_pos"], serialize_task(cheezit)["tol_pos"]);
  EXPECT_EQ(swapped.start_arm_config, cheezit.start_arm_config);
  EXPECT_EQ(swapped.ee_group, cheezit.ee_group);
  EXPECT_NE(swapped.object.digest, cheezit.object.digest);
  EXPECT_EQ(swapped.object.digest, goblet.digest);
}

TEST(UpdateObject, IdenticalBoxKeepsTheDigest)
{
  const TaskDescription cube = load_task(fixture("tasks/cube.json"), ref6());
  const ObjectInfo same = parse_object(serialize_object(cube.object), ".", "/object");
  EXPECT_EQ(update_object(cube, same).object.digest, cube.object.digest);
}

TEST(UpdateObject, RejectsEmptyGeometry)
{
  const TaskDescription cube = load_task(fixture("tasks/cube.json"), ref6());
  EXPECT_THROW(update_object(cube, ObjectInfo{}), InvalidObjectError);
  EXPECT_THROW(ObjectInfo::from_mesh(TriMesh{}), InvalidObjectError);
}

TEST(GraspFormat, RoundTripsAndValidatesAgainstTheHand)
{
  const EndEffectorModel& ee = ref6().end_effector("parallel_gripper");
  Grasp g;
  g.tcp_in_object = Pose::from_xyz_rpy(Eigen::Vector3d(0.01, 0.02, 0.1), Eigen::Vector3d(0.3, 0.2, 0.1));
  g.finger_config = ee.closed_config();
  g.ee_name = ee.name;
  g.contacts.push_back({Eigen::Vector3d(0.02, 0, 0), Eigen::Vector3d(1, 0, 0), 0, 0});
  const Grasp back = parse_grasp(nlohmann::json::parse(serialize_grasp(g).dump()), "/grasp");
  expect_pose_near(back.tcp_in_object, g.tcp_in_object, 1e-12);
  EXPECT_EQ(back.finger_config, g.finger_config);
  ASSERT_EQ(back.contacts.size(), 1u);
  EXPECT_EQ(back.contacts[0].normal, g.contacts[0].normal);
  EXPECT_NO_THROW(validate_grasp(back, ee, "/grasp"));

  Grasp wide = g;
  wide.finger_config["finger_left"] = 0.2;
  EXPECT_THROW(validate_grasp(wide, ee, "/grasp"), SchemaError);
  Grasp other = g;
  other.ee_name = "suction";
  EXPECT_THROW(validate_grasp(other, ee, "/grasp"), SchemaError);
}

TEST(JointConfigFormat, AcceptsMapAndParallelArrays)
{
  const auto a = parse_joint_config({{"a", 1.0}, {"b", 2.0}}, "/q");
  const auto b = parse_joint_config({{"name", {"a", "b"}}, {"position", {1.0, 2.0}}}, "/q");
  EXPECT_EQ(a, b);
  EXPECT_THROW(parse_joint_config({{"name", {"a"}}, {"position", {1.0, 2.0}}}, "/q"), SchemaError);
}
