#pragma once

#include <stdexcept>
#include <string>

namespace qst {

// Numerical failure (root count mismatch, integrator divergence,
// positivity loss, ...). Distinct from invalid input, which uses
// std::invalid_argument / std::domain_error.
class solver_error : public std::runtime_error {
public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qst
