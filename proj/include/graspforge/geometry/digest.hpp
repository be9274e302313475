#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "graspforge/geometry/tri_mesh.hpp"

namespace graspforge
{

/// Vertex quantization step used when canonicalizing geometry for hashing.
inline constexpr double kDigestQuantum = 1e-6;

/// SHA-256 of canonicalized mesh geometry.
struct MeshDigest
{
  std::array<std::uint8_t, 32> bytes{};

  std::string hex() const;
  static std::optional<MeshDigest> from_hex(std::string_view hex);

  friend auto operator<=>(const MeshDigest&, const MeshDigest&) = default;
};

/// Canonical form: vertices quantized to kDigestQuantum and welded, sorted
/// lexicographically; faces remapped, rotated so the smallest index leads
/// (winding kept), then sorted. Invariant to vertex and face permutation.
MeshDigest mesh_digest(const TriMesh& mesh);

/// Hex SHA-256 of an arbitrary byte string.
std::string sha256_hex(std::string_view data);

}  // namespace graspforge
