#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

namespace aivgt {

/// Numeric table with named columns. Values are finite; names are unique.
struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // n x p
  std::string provenance;

  long n() const { return values.rows(); }
  int p() const { return static_cast<int>(values.cols()); }
  int col(std::string_view name) const;         // throws input_error
  bool has_col(std::string_view name) const;
  Eigen::VectorXd column(std::string_view name) const;

  /// Validates invariants (finite values, unique names, n >= 2).
  void validate() const;
};

/// Strict CSV: comma separated, one header row, every cell a finite number.
/// Missing or non-numeric cells are rejected, not imputed.
Dataset read_csv(const std::string& path);
Dataset parse_csv(const std::string& text, std::string provenance);
void write_csv(const Dataset& d, const std::string& path);
std::string to_csv(const Dataset& d);

}  // namespace aivgt
