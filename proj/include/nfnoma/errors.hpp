// SPDX-License-Identifier: Apache-2.0
//
// nfnoma - near-field hybrid-NOMA downlink simulator and power allocation solvers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NFNOMA_ERRORS_HPP
#define NFNOMA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nfnoma {

// Malformed or inconsistent configuration (files, CLI overrides, scenario specs).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure inside a precoder or power-allocation solver
// (ill-conditioned Gram matrix, non-convergence).
class SolverError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure while reading inputs or writing result files.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace nfnoma

#endif
