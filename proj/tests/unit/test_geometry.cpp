#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "builders.hpp"
#include "graspforge/geometry/digest.hpp"
#include "graspforge/geometry/errors.hpp"
#include "graspforge/geometry/mesh_io.hpp"
#include "graspforge/geometry/point_cloud.hpp"
#include "graspforge/geometry/pose.hpp"
#include "graspforge/geometry/primitives.hpp"
#include "graspforge/geometry/proximity.hpp"
#include "graspforge/geometry/sampling.hpp"
#include "graspforge/geometry/tri_mesh.hpp"
#include "graspforge/json_schema.hpp"

using namespace graspforge;
using graspforge::testing::random_pose;

namespace
{

// distance from q to the axis-aligned box [-h, h]; negative inside
double box_signed_distance(const Eigen::Vector3d& q, const Eigen::Vector3d& h)
{
  const Eigen::Vector3d d = q.cwiseAbs() - h;
  const double outside = d.cwiseMax(0.0).norm();
  const double inside = std::min(d.maxCoeff(), 0.0);
  return outside + inside;
}

}  // namespace

TEST(Pose, ComposeWithInverseIsIdentity)
{
  Rng rng(11);
  for (int i = 0; i < 200; ++i)
  {
    const Pose p = random_pose(rng);
    const Pose id = p * p.inverse();
    EXPECT_LT(id.position.norm(), 1e-12);
    EXPECT_LT(angular_distance(id.orientation, Eigen::Quaterniond::Identity()), 1e-7);
  }
}

TEST(Pose, CompositionMatchesHomogeneousMatrices)
{
  Rng rng(12);
  for (int i = 0; i < 100; ++i)
  {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const Eigen::Matrix4d expected = a.isometry().matrix() * b.isometry().matrix();
    EXPECT_TRUE((a * b).isometry().matrix().isApprox(expected, 1e-12));
    const Eigen::Vector3d x(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    EXPECT_TRUE(((a * b) * x).isApprox(a * (b * x), 1e-12));
  }
}

TEST(Pose, RpyIsFixedAxis)
{
  const Eigen::Vector3d rpy(0.3, -0.4, 1.1);
  const Pose p = Pose::from_xyz_rpy(Eigen::Vector3d(1, 2, 3), rpy);
  const Eigen::Matrix3d expected = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                                    Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                                    Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                                       .toRotationMatrix();
  EXPECT_TRUE(p.rotation_matrix().isApprox(expected, 1e-12));
  EXPECT_EQ(p.position, Eigen::Vector3d(1, 2, 3));
}

TEST(Pose, IntrinsicXyzOrder)
{
  const Eigen::Vector3d a(0.2, 0.5, -0.7);
  const Eigen::Matrix3d expected = (Eigen::AngleAxisd(a.x(), Eigen::Vector3d::UnitX()) *
                                    Eigen::AngleAxisd(a.y(), Eigen::Vector3d::UnitY()) *
                                    Eigen::AngleAxisd(a.z(), Eigen::Vector3d::UnitZ()))
                                       .toRotationMatrix();
  EXPECT_TRUE(intrinsic_xyz(a).toRotationMatrix().isApprox(expected, 1e-12));
}

TEST(Pose, AngularDistanceAndRotationErrorAgree)
{
  Rng rng(13);
  for (int i = 0; i < 200; ++i)
  {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    const double d = angular_distance(a.orientation, b.orientation);
    EXPECT_NEAR(d, angular_distance(b.orientation, a.orientation), 1e-9);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, M_PI + 1e-12);
    const Eigen::Vector3d e = rotation_error(a.orientation, b.orientation);
    EXPECT_NEAR(e.norm(), d, 1e-7);
    // applying the error to `a` must reach `b`
    const Eigen::Quaterniond reached = Eigen::Quaterniond(Eigen::AngleAxisd(e.norm(), e.normalized())) * a.orientation;
    EXPECT_LT(angular_distance(reached, b.orientation), 1e-7);
  }
}

TEST(Rng, DeterministicAndInRange)
{
  Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 1000; ++i)
  {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(TriMesh, BoxAreaVolumeCentroid)
{
  const TriMesh box = make_box(Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(box.num_faces(), 12u);
  EXPECT_NEAR(box.surface_area(), 2 * (1 * 2 + 2 * 3 + 1 * 3), 1e-12);
  EXPECT_NEAR(box.signed_volume(), 6.0, 1e-12);
  EXPECT_LT(box.centroid().norm(), 1e-12);
  EXPECT_TRUE(box.is_watertight());
  // outward normals: every face normal points away from the centre
  for (std::size_t f = 0; f < box.num_faces(); ++f)
  {
    EXPECT_GT(box.face_normals()[f].dot(box.vertex(f, 0)), 0.0);
  }
}

TEST(TriMesh, TransformPreservesMeasures)
{
  Rng rng(21);
  const TriMesh box = make_box(Eigen::Vector3d(0.1, 0.2, 0.3));
  for (int i = 0; i < 20; ++i)
  {
    const Pose p = random_pose(rng);
    const TriMesh moved = box.transformed(p);
    EXPECT_NEAR(moved.signed_volume(), box.signed_volume(), 1e-12);
    EXPECT_NEAR(moved.surface_area(), box.surface_area(), 1e-12);
    EXPECT_TRUE(moved.centroid().isApprox(p.position, 1e-9));
  }
}

TEST(TriMesh, RejectsBadInputAndDropsDegenerateFaces)
{
  std::vector<Eigen::Vector3d> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}};
  EXPECT_THROW(TriMesh(v, {{0, 1, 7}}), InvalidGeometryError);
  auto bad = v;
  bad[1].x() = std::nan("");
  EXPECT_THROW(TriMesh(bad, {{0, 1, 2}}), InvalidGeometryError);
  const TriMesh m(v, {{0, 1, 2}, {0, 1, 3}});
  EXPECT_EQ(m.num_faces(), 1u);
  EXPECT_FALSE(m.is_watertight());
}

TEST(Primitives, CylinderMatchesInscribedPrism)
{
  const double r = 0.03, h = 0.2;
  const int n = 32;
  const TriMesh c = make_cylinder(r, h, n);
  const double prism = 0.5 * n * r * r * std::sin(2 * M_PI / n) * h;
  EXPECT_NEAR(c.signed_volume(), prism, 1e-12);
  EXPECT_TRUE(c.is_watertight());
  EXPECT_LT(c.centroid().norm(), 1e-12);
}

TEST(Primitives, IcosphereInsideSphere)
{
  const TriMesh s = make_icosphere(0.5, 3);
  EXPECT_TRUE(s.is_watertight());
  for (const auto& v : s.vertices())
  {
    EXPECT_NEAR(v.norm(), 0.5, 1e-12);
  }
  const double sphere = 4.0 / 3.0 * M_PI * 0.125;
  EXPECT_LT(s.signed_volume(), sphere);
  EXPECT_GT(s.signed_volume(), 0.97 * sphere);
}

TEST(Sampling, PointsOnSurfaceWithFaceNormals)
{
  const TriMesh box = make_box(Eigen::Vector3d(1, 2, 3));
  const auto samples = sample_surface(box, 2000, 3);
  ASSERT_EQ(samples.size(), 2000u);
  for (const auto& s : samples)
  {
    EXPECT_NEAR(box_signed_distance(s.point, Eigen::Vector3d(0.5, 1, 1.5)), 0.0, 1e-12);
    EXPECT_TRUE(s.normal.isApprox(box.face_normals()[s.face_index], 1e-12));
  }
}

TEST(Sampling, AreaWeightedChiSquare)
{
  // faces of a 1x2x3 box grouped by normal axis have areas 6, 3, 2 (x2 each)
  const TriMesh box = make_box(Eigen::Vector3d(1, 2, 3));
  const std::size_t n = 60000;
  const auto samples = sample_surface(box, n, 99);
  std::array<double, 3> counts{};
  for (const auto& s : samples)
  {
    int axis = 0;
    s.normal.cwiseAbs().maxCoeff(&axis);
    counts[axis] += 1;
  }
  const std::array<double, 3> area{2 * 6.0, 2 * 3.0, 2 * 2.0};
  const double total = 22.0;
  double chi2 = 0.0;
  for (int a = 0; a < 3; ++a)
  {
    const double expected = n * area[a] / total;
    chi2 += (counts[a] - expected) * (counts[a] - expected) / expected;
  }
  // 2 degrees of freedom, p = 0.001
  EXPECT_LT(chi2, 13.82);
}

TEST(Sampling, UniformWithinTriangle)
{
  // in a right triangle the fraction below x + y = 1/sqrt(2) is 1/2 under uniform sampling
  const TriMesh tri({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  const auto samples = sample_surface(tri, 40000, 5);
  double inner = 0;
  for (const auto& s : samples)
  {
    inner += (s.point.x() + s.point.y()) < 1.0 / std::sqrt(2.0);
  }
  EXPECT_NEAR(inner / samples.size(), 0.5, 0.01);
}

TEST(Sampling, SameSeedSameSamples)
{
  const TriMesh s = make_icosphere(1.0, 2);
  const auto a = sample_surface(s, 500, 77);
  const auto b = sample_surface(s, 500, 77);
  const auto c = sample_surface(s, 500, 78);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    EXPECT_EQ(a[i].point, b[i].point);
    EXPECT_EQ(a[i].face_index, b[i].face_index);
    differs |= a[i].point != c[i].point;
  }
  EXPECT_TRUE(differs);
}

TEST(Proximity, BoxDistanceMatchesAnalytic)
{
  const Eigen::Vector3d h(0.02, 0.03, 0.05);
  const MeshProximity prox(make_box(2 * h));
  Rng rng(31);
  for (int i = 0; i < 500; ++i)
  {
    const Eigen::Vector3d q(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1));
    const double sd = box_signed_distance(q, h);
    const ClosestPoint c = prox.closest_point(q);
    EXPECT_NEAR(c.distance, std::abs(sd), 1e-12);
    EXPECT_NEAR((c.point - q).norm(), c.distance, 1e-12);
    EXPECT_EQ(prox.contains(q), sd < 0.0);
  }
}

TEST(Proximity, BvhMatchesBruteForce)
{
  const TriMesh mesh = make_icosphere(0.3, 3).transformed(Pose::translation(Eigen::Vector3d(0.1, 0, 0)));
  const MeshProximity prox(mesh);
  Rng rng(32);
  for (int i = 0; i < 300; ++i)
  {
    const Eigen::Vector3d q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    EXPECT_NEAR(prox.closest_point(q).distance, closest_point(mesh, q).distance, 1e-12);
  }
}

TEST(Proximity, SegmentDistanceAgainstDenseSampling)
{
  const TriMesh mesh = make_box(Eigen::Vector3d(0.1, 0.1, 0.1));
  const MeshProximity prox(mesh);
  Rng rng(33);
  for (int i = 0; i < 200; ++i)
  {
    const Eigen::Vector3d p0(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    const Eigen::Vector3d p1(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
    const SegmentClosest sc = prox.closest_to_segment(p0, p1);
    // oracle: minimum over a fine parameter sweep, each point by brute force
    double sweep = std::numeric_limits<double>::infinity();
    bool crosses = false;
    for (int k = 0; k <= 2000; ++k)
    {
      const Eigen::Vector3d x = p0 + (p1 - p0) * (k / 2000.0);
      sweep = std::min(sweep, closest_point(mesh, x).distance);
      crosses |= box_signed_distance(x, Eigen::Vector3d::Constant(0.05)) <= 0.0;
    }
    const double step = (p1 - p0).norm() / 2000.0;
    if (crosses)
    {
      EXPECT_NEAR(sc.distance, 0.0, 1e-12);
    }
    else
    {
      EXPECT_LE(sc.distance, sweep + 1e-12);
      EXPECT_GE(sc.distance, sweep - step);
    }
    EXPECT_NEAR((sc.mesh_point - sc.segment_point).norm(), sc.distance, 1e-9);
  }
}

TEST(Proximity, ContainsOnConcaveMesh)
{
  // L-shaped prism: union of two boxes, built explicitly as one closed surface
  std::vector<Eigen::Vector3d> v;
  const std::vector<Eigen::Vector2d> outline{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  for (double z : {0.0, 1.0})
  {
    for (const auto& p : outline)
    {
      v.emplace_back(p.x(), p.y(), z);
    }
  }
  std::vector<Face> f;
  // bottom (normal -z) and top (+z), fans from vertex 0 of the convex split
  const std::vector<Face> cap{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}};
  for (const auto& c : cap)
  {
    f.push_back({c[0], c[2], c[1]});
    f.push_back({c[0] + 6, c[1] + 6, c[2] + 6});
  }
  for (int i = 0; i < 6; ++i)
  {
    const int j = (i + 1) % 6;
    f.push_back({i, j, j + 6});
    f.push_back({i, j + 6, i + 6});
  }
  const TriMesh l(v, f);
  ASSERT_TRUE(l.is_watertight());
  ASSERT_NEAR(l.signed_volume(), 3.0, 1e-12);
  const MeshProximity prox(l);
  EXPECT_TRUE(prox.contains({0.5, 0.5, 0.5}));
  EXPECT_TRUE(prox.contains({1.5, 0.5, 0.5}));
  EXPECT_TRUE(prox.contains({0.5, 1.5, 0.5}));
  EXPECT_FALSE(prox.contains({1.5, 1.5, 0.5}));
  EXPECT_FALSE(prox.contains({0.5, 0.5, 1.5}));
}

TEST(MeshIo, ObjRoundTripAndQuads)
{
  const std::string obj =
      "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\nf 1/1/1 2/1/1 3/1/1 4/1/1\n";
  std::istringstream in(obj);
  const TriMesh quad = read_obj(in);
  EXPECT_EQ(quad.num_faces(), 2u);
  EXPECT_NEAR(quad.surface_area(), 1.0, 1e-12);

  const TriMesh box = make_box(Eigen::Vector3d(0.1, 0.2, 0.3));
  std::stringstream io;
  write_obj(io, box);
  const TriMesh back = read_obj(io);
  EXPECT_EQ(mesh_digest(back), mesh_digest(box));

  std::istringstream negative("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  EXPECT_EQ(read_obj(negative).num_faces(), 1u);
  std::istringstream broken("v 0 0 0\nf 1 2 3\n");
  EXPECT_THROW(read_obj(broken), std::exception);
}

TEST(MeshIo, StlAsciiAndBinary)
{
  const std::string ascii =
      "solid t\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\n"
      "endsolid t\n";
  std::istringstream a(ascii);
  const TriMesh ma = read_stl(a);
  EXPECT_EQ(ma.num_faces(), 1u);
  EXPECT_NEAR(ma.surface_area(), 0.5, 1e-12);

  std::string bin(80, '\0');
  auto put_u32 = [&](std::uint32_t x) { bin.append(reinterpret_cast<const char*>(&x), 4); };
  auto put_f = [&](float x) { bin.append(reinterpret_cast<const char*>(&x), 4); };
  put_u32(1);
  for (float x : {0.f, 0.f, 1.f, 0.f, 0.f, 0.f, 2.f, 0.f, 0.f, 0.f, 2.f, 0.f})
  {
    put_f(x);
  }
  bin.append(2, '\0');
  std::istringstream b(bin);
  const TriMesh mb = read_stl(b);
  EXPECT_EQ(mb.num_faces(), 1u);
  EXPECT_NEAR(mb.surface_area(), 2.0, 1e-12);
}

TEST(Digest, InvariantToVertexOrderAndWinding)
{
  const TriMesh box = make_box(Eigen::Vector3d(0.04, 0.04, 0.04));
  std::vector<Eigen::Vector3d> v = box.vertices();
  std::vector<Face> f = box.faces();
  // reverse vertex order and rotate each face's corner order
  std::vector<Eigen::Vector3d> rv(v.rbegin(), v.rend());
  const int n = static_cast<int>(v.size());
  std::vector<Face> rf;
  for (auto it = f.rbegin(); it != f.rend(); ++it)
  {
    rf.push_back({n - 1 - (*it)[1], n - 1 - (*it)[2], n - 1 - (*it)[0]});
  }
  EXPECT_EQ(mesh_digest(TriMesh(rv, rf)), mesh_digest(box));
}

TEST(Digest, SensitiveAboveQuantumOnly)
{
  const TriMesh box = make_box(Eigen::Vector3d(0.04, 0.04, 0.04));
  auto v = box.vertices();
  v[0].x() += 1e-9;
  EXPECT_EQ(mesh_digest(TriMesh(v, box.faces())), mesh_digest(box));
  v[0].x() += 1e-4;
  EXPECT_NE(mesh_digest(TriMesh(v, box.faces())), mesh_digest(box));
  const MeshDigest d = mesh_digest(box);
  EXPECT_EQ(d.hex().size(), 64u);
  EXPECT_EQ(MeshDigest::from_hex(d.hex()), d);
  EXPECT_FALSE(MeshDigest::from_hex("zz").has_value());
}

TEST(Digest, Sha256KnownVector)
{
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(PointCloud, CropIsInclusiveAndOrderPreserving)
{
  const PointCloud cloud({{0, 0, 0}, {1, 0, 0}, {0.5, 0.5, 0}, {2, 2, 2}, {-1, 0, 0}});
  RoiBox box;
  box.center = Pose::translation(Eigen::Vector3d(0.5, 0, 0));
  box.half_extents = Eigen::Vector3d(0.5, 0.5, 0.5);
  const PointCloud out = crop_cloud(cloud, box);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out.points()[0], Eigen::Vector3d(0, 0, 0));
  EXPECT_EQ(out.points()[1], Eigen::Vector3d(1, 0, 0));
  EXPECT_EQ(out.points()[2], Eigen::Vector3d(0.5, 0.5, 0));
}

TEST(PointCloud, CropRespectsBoxRotation)
{
  RoiBox box;
  box.center = Pose::rotation(Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 4, Eigen::Vector3d::UnitZ())));
  box.half_extents = Eigen::Vector3d(1, 0.1, 1);
  EXPECT_TRUE(box.contains({0.6, 0.6, 0}));
  EXPECT_FALSE(box.contains({0.6, -0.6, 0}));
  box.half_extents.y() = -1;
  EXPECT_THROW(box.validate(), std::exception);
}

TEST(PointCloud, ReconstructionOfCylinderCloud)
{
  Rng rng(41);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 3000; ++i)
  {
    const double a = rng.uniform(0, 2 * M_PI);
    pts.emplace_back(0.035 * std::cos(a), 0.035 * std::sin(a), rng.uniform(0.0, 0.23));
  }
  const TriMesh m = reconstruct_mesh(PointCloud(pts));
  EXPECT_TRUE(m.is_watertight());
  const double v = M_PI * 0.035 * 0.035 * 0.23;
  EXPECT_NEAR(m.signed_volume(), v, 0.05 * v);
  const Eigen::AlignedBox3d b = m.bounds();
  EXPECT_NEAR(b.max().z(), 0.23, 1e-3);
  EXPECT_NEAR(b.min().z(), 0.0, 1e-3);
}

TEST(PointCloud, ReconstructionErrors)
{
  EXPECT_THROW(reconstruct_mesh(PointCloud({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}})), ReconstructionError);
  try
  {
    reconstruct_mesh(PointCloud({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {2, 3, 0}}));
    FAIL() << "coplanar cloud reconstructed";
  }
  catch (const ReconstructionError& e)
  {
    EXPECT_EQ(e.point_count(), 5u);
  }
}

TEST(PointCloud, TextParsing)
{
  const PointCloud c = parse_cloud_text("# header\n0 0 0\n\n1 2 3\n");
  EXPECT_EQ(c.size(), 2u);
  EXPECT_THROW(parse_cloud_text("1 2\n"), InvalidGeometryError);
  EXPECT_THROW(parse_cloud_text("1 2 3 4\n"), InvalidGeometryError);
  EXPECT_THROW(parse_cloud_text("nan 0 0\n"), InvalidGeometryError);
  EXPECT_THROW(parse_cloud_text("0 0 0\n1 1 1\n2 2 2\n", 2), InvalidGeometryError);
}

TEST(JsonSchema, PoseReadWrite)
{
  const auto j = nlohmann::json::parse(R"({"xyz":[1,2,3],"rpy":[0,0,1.5707963267948966]})");
  const Pose p = json_io::read_pose(j, "/pose");
  EXPECT_TRUE((p * Eigen::Vector3d(1, 0, 0)).isApprox(Eigen::Vector3d(1, 3, 3), 1e-12));
  const Pose back = json_io::read_pose(json_io::write_pose(p), "/pose");
  EXPECT_LT((back.position - p.position).norm(), 1e-15);
  EXPECT_LT(angular_distance(back.orientation, p.orientation), 1e-7);

  try
  {
    json_io::read_pose(nlohmann::json::parse(R"({"xyz":[1,2],"quat":[0,0,0,1]})"), "/steps/2");
    FAIL();
  }
  catch (const SchemaError& e)
  {
    EXPECT_EQ(e.path(), "/steps/2/xyz");
  }
  EXPECT_THROW(json_io::read_pose(nlohmann::json::parse(R"({"xyz":[0,0,0],"quat":[0,0,0,0]})"), ""), SchemaError);
  EXPECT_THROW(
      json_io::read_pose(nlohmann::json::parse(R"({"xyz":[0,0,0],"quat":[0,0,0,1],"rpy":[0,0,0]})"), ""),
      SchemaError);
}
