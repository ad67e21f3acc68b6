#pragma once

#include <stdexcept>
#include <string>

namespace svsim {

// Bad user input: model parameters, CLI flags, config files.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical guard tripped during simulation (negative radicand, singular
// coefficient, degenerate coupling weights).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// The MLMC driver hit its maximum level before the bias test passed.
class BudgetExceeded : public NumericalError {
 public:
  explicit BudgetExceeded(const std::string& what) : NumericalError(what) {}
};

}  // namespace svsim
