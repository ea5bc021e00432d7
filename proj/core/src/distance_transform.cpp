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

#include "escan/distance_transform.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace escan {

namespace {

// Large finite stand-in for "no obstacle"; stays exact under the parabola
// arithmetic and reads as infinity downstream.
constexpr double kFar = 1e15;

// 1D squared distance transform (lower envelope of parabolas rooted at
// (i, f[i])), Felzenszwalb & Huttenlocher.
void dt_1d(const std::vector<double>& f, std::vector<double>& d) {
  const int n = static_cast<int>(f.size());
  static thread_local std::vector<int> v;
  static thread_local std::vector<double> z;
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  d.resize(n);

  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s = (f[q] + q * q - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    while (s <= z[k]) {
      --k;
      s = (f[q] + q * q - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]));
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }

  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const int p = v[k];
    d[q] = (q - p) * static_cast<double>(q - p) + f[p];
  }
}

}  // namespace

Grid2<double> squared_distance_transform(const Grid2<std::uint8_t>& obstacles) {
  const int nx = obstacles.nx();
  const int ny = obstacles.ny();
  Grid2<double> dist(nx, ny, 0.0);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> f;
  std::vector<double> d;

  // Columns first.
  f.resize(ny);
  for (int x = 0; x < nx; ++x) {
    for (int y = 0; y < ny; ++y) f[y] = obstacles.at(x, y) ? 0.0 : kFar;
    dt_1d(f, d);
    for (int y = 0; y < ny; ++y) dist.at(x, y) = d[y];
  }
  // Then rows.
  f.resize(nx);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) f[x] = dist.at(x, y);
    dt_1d(f, d);
    for (int x = 0; x < nx; ++x) dist.at(x, y) = std::min(d[x], kFar);
  }
  // Anything still at the sentinel scale means "no obstacle anywhere".
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      if (dist.at(x, y) >= kFar / 2) dist.at(x, y) = kInf;
    }
  }
  return dist;
}

}  // namespace escan
