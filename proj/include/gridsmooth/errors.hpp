#pragma once

#include <stdexcept>
#include <string>

namespace gridsmooth {

/// Bad user-supplied value (order out of range, eta outside [0,1], ...).
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested difference order is outside the supported range.
class unsupported_order : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

/// Input vector is shorter than the stencil support.
class curve_too_short : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

/// The constraint system for a stencil has no nonzero solution at this width.
class infeasible_width : public invalid_parameter {
 public:
  using invalid_parameter::invalid_parameter;
};

/// The stencil solution space is still multi-dimensional after the
/// sparsity selection rule; carries the residual dimension.
class non_unique_solution : public std::runtime_error {
 public:
  non_unique_solution(int dimension, const std::string& what)
      : std::runtime_error(what), dimension_(dimension) {}
  int dimension() const noexcept { return dimension_; }

 private:
  int dimension_;
};

/// GCV denominator d - tr(S) is numerically zero (alpha = 0 or P = 0).
class degenerate_denominator : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization or other numerical failure.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File I/O failure; message carries the path.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; message carries row/column context.
class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gridsmooth
