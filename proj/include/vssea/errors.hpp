#pragma once

#include <stdexcept>
#include <string>

namespace vssea {

/// Invalid configuration value, unknown key, or malformed input text.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A synthesis step could not produce a certified result (non-Hurwitz
/// request, singular Lyapunov system, Riccati non-convergence, ...).
class SynthesisError : public std::runtime_error {
 public:
  explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation outside the physical domain of a model (e.g. stiffness motor
/// below its minimum position).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Non-finite state or derivative encountered while integrating.
class SimulationDivergence : public std::runtime_error {
 public:
  SimulationDivergence(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}

  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace vssea
