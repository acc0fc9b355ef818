#pragma once

#include <stdexcept>
#include <string>

namespace airybeta {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

// Violated caller obligations, e.g. mismatched paths or non-vanishing forcing.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct BracketError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace airybeta
