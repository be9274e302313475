#include "graspforge/geometry/digest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include <openssl/evp.h>

#include "graspforge/geometry/errors.hpp"

namespace graspforge
{
namespace
{

std::array<std::uint8_t, 32> sha256(std::string_view data)
{
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
  {
    throw std::runtime_error("SHA-256 computation failed");
  }
  return out;
}

void append_le(std::string& buf, std::int64_t value)
{
  auto u = static_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i)
  {
    buf.push_back(static_cast<char>(u & 0xff));
    u >>= 8;
  }
}

std::string to_hex(const std::uint8_t* data, std::size_t n)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i)
  {
    s.push_back(digits[data[i] >> 4]);
    s.push_back(digits[data[i] & 0xf]);
  }
  return s;
}

}  // namespace

std::string MeshDigest::hex() const
{
  return to_hex(bytes.data(), bytes.size());
}

std::optional<MeshDigest> MeshDigest::from_hex(std::string_view hex)
{
  if (hex.size() != 64)
  {
    return std::nullopt;
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  MeshDigest d;
  for (std::size_t i = 0; i < 32; ++i)
  {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0)
    {
      return std::nullopt;
    }
    d.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return d;
}

MeshDigest mesh_digest(const TriMesh& mesh)
{
  if (mesh.empty())
  {
    throw InvalidGeometryError("cannot digest an empty mesh");
  }

  using Key = std::array<std::int64_t, 3>;
  std::vector<Key> quantized;
  quantized.reserve(mesh.vertices().size());
  for (const auto& v : mesh.vertices())
  {
    quantized.push_back({std::llround(v.x() / kDigestQuantum), std::llround(v.y() / kDigestQuantum),
                         std::llround(v.z() / kDigestQuantum)});
  }

  // weld and order
  std::map<Key, int> order;
  for (const auto& f : mesh.faces())
  {
    for (int idx : f)
    {
      order.emplace(quantized[idx], 0);
    }
  }
  int next = 0;
  for (auto& [key, slot] : order)
  {
    slot = next++;
  }

  std::vector<Face> faces;
  faces.reserve(mesh.num_faces());
  for (const auto& f : mesh.faces())
  {
    Face g{order.at(quantized[f[0]]), order.at(quantized[f[1]]), order.at(quantized[f[2]])};
    const auto lead = std::min_element(g.begin(), g.end()) - g.begin();
    std::rotate(g.begin(), g.begin() + lead, g.end());
    faces.push_back(g);
  }
  std::sort(faces.begin(), faces.end());

  std::string buf;
  buf.reserve(16 + order.size() * 24 + faces.size() * 24);
  append_le(buf, static_cast<std::int64_t>(order.size()));
  for (const auto& [key, slot] : order)
  {
    for (auto c : key)
    {
      append_le(buf, c);
    }
  }
  append_le(buf, static_cast<std::int64_t>(faces.size()));
  for (const auto& f : faces)
  {
    for (int idx : f)
    {
      append_le(buf, idx);
    }
  }
  return MeshDigest{sha256(buf)};
}

std::string sha256_hex(std::string_view data)
{
  const auto d = sha256(data);
  return to_hex(d.data(), d.size());
}

}  // namespace graspforge
