#pragma once

#include <stdexcept>

namespace qh {

// Boundary evaluation at a real-axis pole of the representation.
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Moment integral of x^k against a density whose support contains 0, k < 0.
class DivergentMomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Asymptotic expansion order not representable for the given measure.
class UnavailableExpansionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Scenario cannot be discretized into a well-posed cone problem.
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed scenario/result document.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qh
