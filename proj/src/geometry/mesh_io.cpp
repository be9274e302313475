#include "graspforge/geometry/mesh_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <map>
#include <sstream>
#include <vector>

#include "graspforge/geometry/errors.hpp"

namespace graspforge
{
namespace
{

class VertexWelder
{
public:
  int index_of(const Eigen::Vector3d& p)
  {
    const std::array<double, 3> key{p.x(), p.y(), p.z()};
    auto [it, inserted] = lookup_.emplace(key, static_cast<int>(vertices_.size()));
    if (inserted)
    {
      vertices_.push_back(p);
    }
    return it->second;
  }

  std::vector<Eigen::Vector3d> take() { return std::move(vertices_); }

private:
  std::map<std::array<double, 3>, int> lookup_;
  std::vector<Eigen::Vector3d> vertices_;
};

TriMesh read_ascii_stl(std::istream& in)
{
  VertexWelder welder;
  std::vector<Face> faces;
  std::string token;
  Face current{};
  int corner = 0;
  while (in >> token)
  {
    if (token == "vertex")
    {
      Eigen::Vector3d p;
      if (!(in >> p.x() >> p.y() >> p.z()))
      {
        throw MeshIoError("malformed ASCII STL vertex");
      }
      if (corner < 3)
      {
        current[corner] = welder.index_of(p);
      }
      ++corner;
    }
    else if (token == "endfacet")
    {
      if (corner != 3)
      {
        throw MeshIoError("ASCII STL facet without exactly 3 vertices");
      }
      faces.push_back(current);
      corner = 0;
    }
  }
  if (faces.empty())
  {
    throw MeshIoError("STL contains no facets");
  }
  return TriMesh(welder.take(), std::move(faces));
}

}  // namespace

TriMesh read_obj(std::istream& in)
{
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Face> faces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    std::istringstream fields(line);
    std::string tag;
    if (!(fields >> tag))
    {
      continue;
    }
    if (tag == "v")
    {
      Eigen::Vector3d p;
      if (!(fields >> p.x() >> p.y() >> p.z()))
      {
        throw MeshIoError("OBJ line " + std::to_string(line_no) + ": malformed vertex");
      }
      vertices.push_back(p);
    }
    else if (tag == "f")
    {
      std::vector<int> poly;
      std::string ref;
      while (fields >> ref)
      {
        int idx = 0;
        try
        {
          idx = std::stoi(ref.substr(0, ref.find('/')));
        }
        catch (const std::exception&)
        {
          throw MeshIoError("OBJ line " + std::to_string(line_no) + ": bad face index '" + ref + "'");
        }
        if (idx < 0)
        {
          idx = static_cast<int>(vertices.size()) + idx + 1;
        }
        poly.push_back(idx - 1);
      }
      if (poly.size() < 3)
      {
        throw MeshIoError("OBJ line " + std::to_string(line_no) + ": face needs at least 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
      {
        faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  try
  {
    return TriMesh(std::move(vertices), std::move(faces));
  }
  catch (const InvalidGeometryError& e)
  {
    throw MeshIoError(std::string("OBJ: ") + e.what());
  }
}

TriMesh read_stl(std::istream& in)
{
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() >= 84)
  {
    std::uint32_t count = 0;
    std::memcpy(&count, data.data() + 80, sizeof(count));
    if (data.size() == 84 + static_cast<std::size_t>(count) * 50)
    {
      VertexWelder welder;
      std::vector<Face> faces;
      faces.reserve(count);
      for (std::uint32_t i = 0; i < count; ++i)
      {
        const char* rec = data.data() + 84 + static_cast<std::size_t>(i) * 50;
        Face f{};
        for (int k = 0; k < 3; ++k)
        {
          float xyz[3];
          std::memcpy(xyz, rec + 12 + 12 * k, sizeof(xyz));
          f[k] = welder.index_of(Eigen::Vector3d(xyz[0], xyz[1], xyz[2]));
        }
        faces.push_back(f);
      }
      return TriMesh(welder.take(), std::move(faces));
    }
  }
  if (data.rfind("solid", 0) == 0)
  {
    std::istringstream text(data);
    return read_ascii_stl(text);
  }
  throw MeshIoError("not a valid binary or ASCII STL file");
}

TriMesh load_mesh(const std::string& path)
{
  std::string ext = path.size() >= 4 ? path.substr(path.size() - 4) : "";
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw MeshIoError("cannot open mesh file '" + path + "'");
  }
  if (ext == ".obj")
  {
    return read_obj(in);
  }
  if (ext == ".stl")
  {
    return read_stl(in);
  }
  throw MeshIoError("unsupported mesh format '" + path + "' (expected .obj or .stl)");
}

void write_obj(std::ostream& out, const TriMesh& mesh)
{
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices())
  {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const auto& f : mesh.faces())
  {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

}  // namespace graspforge
