#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graspforge
{

class InvalidGeometryError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A point cloud larger than the caller's cap.
class CloudTooLargeError : public InvalidGeometryError
{
public:
  using InvalidGeometryError::InvalidGeometryError;
};

class MeshIoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ReconstructionError : public std::runtime_error
{
public:
  ReconstructionError(const std::string& what, std::size_t point_count)
    : std::runtime_error(what), point_count_(point_count)
  {
  }

  /// Number of points that were available to the reconstruction.
  std::size_t point_count() const { return point_count_; }

private:
  std::size_t point_count_;
};

}  // namespace graspforge
