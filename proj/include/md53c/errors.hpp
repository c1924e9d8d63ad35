#pragma once

#include <stdexcept>
#include <string>

namespace md53c {

/// Family parameters violate the constraints of the classification list.
struct InvalidParams : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A point outside the foliated manifold V was passed where V is required.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// No equivalence map exists in closed form for the requested family.
struct UnsupportedMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Space or algebra expression outside what the K-group calculus handles.
struct UnsupportedExpr : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// K-theory data that no exact six-term sequence can realize.
struct InconsistentInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace md53c
