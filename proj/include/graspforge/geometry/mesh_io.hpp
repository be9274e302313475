#pragma once

#include <iosfwd>
#include <string>

#include "graspforge/geometry/tri_mesh.hpp"

namespace graspforge
{

/// Wavefront OBJ: `v` and `f` records; polygons are fan-triangulated,
/// negative (relative) indices and `v/vt/vn` references are accepted.
TriMesh read_obj(std::istream& in);

/// Binary STL, with ASCII STL accepted as a fallback. Coincident vertices are welded.
TriMesh read_stl(std::istream& in);

/// Dispatches on file extension (.obj / .stl, case-insensitive). Throws MeshIoError.
TriMesh load_mesh(const std::string& path);

void write_obj(std::ostream& out, const TriMesh& mesh);

}  // namespace graspforge
