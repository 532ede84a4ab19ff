#pragma once

#include <stdexcept>
#include <string>

namespace riskfilter {

// Violated precondition or malformed argument (bad dimensions, invalid config values).
class ContractViolation : public std::invalid_argument {
public:
  explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// A barrier sample fell below the configured support bound b_min, so the
// concentration bound's hypothesis no longer holds.
class SupportViolation : public std::runtime_error {
public:
  SupportViolation(const std::string& what, int particle_index, double value, double b_min)
      : std::runtime_error(what), particle_index(particle_index), value(value), b_min(b_min) {}
  int particle_index;
  double value;
  double b_min;
};

// A particle became non-finite during SDE integration.
class PropagationDiverged : public std::runtime_error {
public:
  PropagationDiverged(const std::string& what, int particle_index)
      : std::runtime_error(what), particle_index(particle_index) {}
  int particle_index;
};

// All likelihoods were zero (or their sum underflowed) in a measurement update.
// Caller policy decides what to do with the prior belief.
class DegenerateUpdate : public std::runtime_error {
public:
  explicit DegenerateUpdate(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace riskfilter
