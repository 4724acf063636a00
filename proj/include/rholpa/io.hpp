#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rholpa/simulate.hpp"

namespace rholpa {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

/// CSV with a header row, d columns x_1..x_d, then y. Every x must lie in
/// [0,1]. Errors name the offending line.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Joins already formatted fields with commas.
std::string csv_row(const std::vector<std::string>& fields);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace rholpa
