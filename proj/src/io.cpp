#include "rholpa/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace rholpa {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty (header required)");
  const auto header = split_fields(line);
  if (header.size() < 2) throw std::runtime_error("dataset CSV header needs x_1..x_d and y");
  for (const auto& h : header) {
    if (!h.empty() && (std::isdigit(static_cast<unsigned char>(h[0])) || h[0] == '-' || h[0] == '.')) {
      throw std::runtime_error("dataset CSV: first row looks numeric; a header row is required");
    }
  }
  const int dim = static_cast<int>(header.size()) - 1;
  Dataset data(dim);
  std::vector<double> x(static_cast<std::size_t>(dim));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (int j = 0; j < dim; ++j) {
      const double v = parse_number(fields[static_cast<std::size_t>(j)], line_no);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::runtime_error("line " + std::to_string(line_no) + ": x_" + std::to_string(j + 1) +
                                 " = " + fields[static_cast<std::size_t>(j)] + " outside [0,1]");
      }
      x[static_cast<std::size_t>(j)] = v;
    }
    const double y = parse_number(fields.back(), line_no);
    if (!std::isfinite(y)) throw std::runtime_error("line " + std::to_string(line_no) + ": y not finite");
    data.push_back(x, y);
  }
  return data;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(in);
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  std::vector<std::string> header;
  for (int j = 1; j <= data.dim(); ++j) header.push_back("x_" + std::to_string(j));
  header.emplace_back("y");
  out << csv_row(header) << '\n';
  std::vector<std::string> row;
  for (std::size_t i = 0; i < data.size(); ++i) {
    row.clear();
    for (double v : data.x(i)) row.push_back(format_double(v));
    row.push_back(format_double(data.y(i)));
    out << csv_row(row) << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_dataset_csv(out, data);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace rholpa
