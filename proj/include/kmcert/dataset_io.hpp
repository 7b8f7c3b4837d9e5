#pragma once

#include <iosfwd>
#include <string>

#include "kmcert/geometry.hpp"

namespace kmcert {

/// Parses a dataset from CSV text.
///
/// One point per row with m numeric columns. A header row is detected when its
/// first field is not numeric. When the header's last column is named `label`
/// (case-insensitive) that column is read as integer truth labels; without a
/// header every column is a coordinate.
Dataset parse_dataset_csv(std::istream& in, const std::string& source = "<stream>");

Dataset read_dataset_csv(const std::string& path);

/// Writes `x0,...,x{m-1}[,label]` with a header row. Values use 17 significant digits.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Writes a dense matrix as headerless CSV.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M);

}  // namespace kmcert
