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

#ifndef ESCAN_VISIT_STAMPS_HPP_
#define ESCAN_VISIT_STAMPS_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

namespace escan {

// Epoch-stamped visited marks over a fixed index range; reset is O(1) except
// when the size changes or the epoch counter wraps.
class VisitStamps {
 public:
  void reset(std::int64_t n) {
    if (static_cast<std::int64_t>(stamp_.size()) != n) {
      stamp_.assign(n, 0);
      epoch_ = 0;
    }
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
  }
  bool marked(std::int32_t i) const { return stamp_[i] == epoch_; }
  void mark(std::int32_t i) { stamp_[i] = epoch_; }
  bool test_and_mark(std::int32_t i) {
    if (stamp_[i] == epoch_) return true;
    stamp_[i] = epoch_;
    return false;
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

}  // namespace escan

#endif  // ESCAN_VISIT_STAMPS_HPP_
