#pragma once

#include <stdexcept>
#include <string>

namespace aivgt {

/// Base class for all library errors.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed arguments: unknown nodes/columns, bad preconditions, bad config.
struct input_error : error {
  explicit input_error(const std::string& what) : error(what) {}
};

/// Text that does not parse; carries a 1-based line number.
struct parse_error : error {
  parse_error(const std::string& what, int line)
      : error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};

/// A column with (numerically) zero variance.
struct degenerate_column_error : error {
  explicit degenerate_column_error(const std::string& what) : error(what) {}
};

/// Conditioning covariance block is singular (rcond below threshold).
struct singular_conditioning_error : error {
  explicit singular_conditioning_error(const std::string& what) : error(what) {}
};

/// |partial correlation| >= 1, Fisher z undefined.
struct degenerate_correlation_error : error {
  explicit degenerate_correlation_error(const std::string& what) : error(what) {}
};

/// Rank-deficient regression design matrix.
struct singular_design_error : error {
  explicit singular_design_error(const std::string& what) : error(what) {}
};

/// Instrument has (numerically) no first-stage signal where one is required.
struct weak_instrument_error : error {
  explicit weak_instrument_error(const std::string& what) : error(what) {}
};

}  // namespace aivgt
