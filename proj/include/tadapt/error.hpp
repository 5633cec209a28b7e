// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace tadapt {

enum class ErrorKind {
  Parse,         // malformed input document
  Config,        // invalid MetricConfig / ScenarioSpec / mixed configs
  Precondition,  // a metric precondition does not hold
  Mismatch,      // report and matrix do not belong together
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tadapt
