#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "onebit/recovery.hpp"
#include "onebit/theory.hpp"

namespace onebit {

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

// Matrix CSV: comment header lines starting with '#' (M, method, flags),
// then M row-major lines. Complex entries are written as re,im pairs.
void write_matrix_csv(std::ostream& out, const MatrixEstimate& estimate);
void write_matrix_csv(std::ostream& out, const ComplexMatrixEstimate& estimate);

nlohmann::json to_json(const PairParams& params);
nlohmann::json to_json(const NewtonResult& result);
nlohmann::json to_json(const PairEstimate& estimate);
nlohmann::json to_json(const MatrixEstimate& estimate);
nlohmann::json to_json(const ComplexMatrixEstimate& estimate);
nlohmann::json to_json(const TheoryReport& report);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace onebit
