#pragma once

#include <stdexcept>
#include <string>

namespace cotlen {

// Thrown when an iterative scheme exhausts its iteration budget without
// reaching the required residual. Maps to CLI exit code 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cotlen
