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

#ifndef ESCAN_ERRORS_HPP_
#define ESCAN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace escan {

// Bad option values, invalid parameter combinations. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Scene parse/validation/generation failures. CLI exit code 3.
class SceneError : public std::runtime_error {
 public:
  explicit SceneError(const std::string& what) : std::runtime_error(what) {}
};

// Start and goal lie in different safe components. CLI exit code 4.
class NoPathError : public std::runtime_error {
 public:
  explicit NoPathError(const std::string& what) : std::runtime_error(what) {}
};

// Sensor or view pose inside an obstacle / outside the safe set.
class PoseError : public std::runtime_error {
 public:
  explicit PoseError(const std::string& what) : std::runtime_error(what) {}
};

// Normal completion signal from NBV selection: no view is worth visiting.
class ExplorationComplete : public std::runtime_error {
 public:
  explicit ExplorationComplete(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace escan

#endif  // ESCAN_ERRORS_HPP_
