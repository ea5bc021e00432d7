/*
 * Copyright 2026 The escan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ESCAN_GEOMETRY_HPP_
#define ESCAN_GEOMETRY_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace escan {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{};
  }
};

struct VoxelCoord {
  int x = 0;
  int y = 0;
  int z = 0;
  bool operator==(const VoxelCoord&) const = default;
};

// theta normalized to [0, 2*pi).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

inline double normalize_angle(double theta) {
  const double two_pi = 2.0 * M_PI;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

// Signed smallest difference a - b wrapped into (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = std::fmod(a - b, 2.0 * M_PI);
  if (d > M_PI) d -= 2.0 * M_PI;
  if (d <= -M_PI) d += 2.0 * M_PI;
  return d;
}

struct GridDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  std::int64_t size() const {
    return static_cast<std::int64_t>(nx) * ny * nz;
  }
  bool contains(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  bool contains(const VoxelCoord& c) const { return contains(c.x, c.y, c.z); }
  std::int32_t index(int x, int y, int z) const {
    return static_cast<std::int32_t>((static_cast<std::int64_t>(z) * ny + y) * nx + x);
  }
  std::int32_t index(const VoxelCoord& c) const { return index(c.x, c.y, c.z); }
  VoxelCoord coord(std::int32_t idx) const {
    const int x = static_cast<int>(idx % nx);
    const int y = static_cast<int>((idx / nx) % ny);
    const int z = static_cast<int>(idx / (static_cast<std::int64_t>(nx) * ny));
    return {x, y, z};
  }
  bool operator==(const GridDims&) const = default;
};

template <typename T>
class Grid3 {
 public:
  Grid3() = default;
  Grid3(GridDims dims, T fill = T{}) : dims_(dims), data_(dims.size(), fill) {}

  const GridDims& dims() const { return dims_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  T& operator[](std::int32_t idx) { return data_[idx]; }
  const T& operator[](std::int32_t idx) const { return data_[idx]; }
  T& at(int x, int y, int z) { return data_[dims_.index(x, y, z)]; }
  const T& at(int x, int y, int z) const { return data_[dims_.index(x, y, z)]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }
  void fill(T value) { data_.assign(data_.size(), value); }

  bool operator==(const Grid3&) const = default;

 private:
  GridDims dims_;
  std::vector<T> data_;
};

template <typename T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(int nx, int ny, T fill = T{})
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < nx_ && y < ny_; }
  std::int32_t index(int x, int y) const { return y * nx_ + x; }

  T& operator[](std::int32_t idx) { return data_[idx]; }
  const T& operator[](std::int32_t idx) const { return data_[idx]; }
  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }

  const std::vector<T>& data() const { return data_; }
  void fill(T value) { data_.assign(data_.size(), value); }

  bool operator==(const Grid2&) const = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

}  // namespace escan

#endif  // ESCAN_GEOMETRY_HPP_
