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

#ifndef ESCAN_DISTANCE_TRANSFORM_HPP_
#define ESCAN_DISTANCE_TRANSFORM_HPP_

#include <cstdint>

#include "escan/geometry.hpp"

namespace escan {

// Exact squared Euclidean distance transform (Felzenszwalb & Huttenlocher).
// Input: nonzero cells are obstacles. Output: squared center-to-center
// distance to the nearest obstacle cell, in cell units; infinity if the grid
// holds no obstacle.
Grid2<double> squared_distance_transform(const Grid2<std::uint8_t>& obstacles);

}  // namespace escan

#endif  // ESCAN_DISTANCE_TRANSFORM_HPP_
