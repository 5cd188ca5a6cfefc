/*
 * Copyright (c) 2026 The pdnsynth Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pdnsynth {

enum class ErrorKind {
  Configuration,  // unknown layer, bad parameter
  DegenerateSpec, // pattern produces no stripes
  DegenerateNet,  // net with fewer than two pins
  Connectivity,   // source cannot reach a pad
  Structural,     // singular system, mismatched stacks
  Solver,         // iteration cap hit
  Coverage,       // window grid does not cover the die
  Precondition,   // baseline fails sign-off
  Input,          // malformed file
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Configuration: return "config";
    case ErrorKind::DegenerateSpec: return "degenerate-spec";
    case ErrorKind::DegenerateNet: return "degenerate-net";
    case ErrorKind::Connectivity: return "connectivity";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Input: return "input";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown when the iterative solve runs out of iterations and no direct
// fallback applies. Carries the infinity-norm residual per iteration.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error(ErrorKind::Solver, what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace pdnsynth
