#include "iterreg/data.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "iterreg/errors.hpp"

namespace iterreg {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("csv line " + std::to_string(line_no) + ": cannot parse '" + s + "' as a number");
  }
}

}  // namespace

Sample subset(const Sample& s, const std::vector<Eigen::Index>& idx) {
  Sample out{Matrix(static_cast<Eigen::Index>(idx.size()), s.dim()), Vector(static_cast<Eigen::Index>(idx.size()))};
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.X.row(r) = s.X.row(idx[i]);
    out.y(r) = s.y(idx[i]);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const Sample& s) {
  for (Eigen::Index j = 0; j < s.dim(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    for (Eigen::Index j = 0; j < s.dim(); ++j) out << format_double(s.X(i, j)) << ',';
    out << format_double(s.y(i)) << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Sample& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  write_csv(out, s);
}

Sample read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() < 2 || header.back() != "y") throw ConfigError("csv: header must be x0,...,x{d-1},y");
  const std::size_t d = header.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[j] != "x" + std::to_string(j)) throw ConfigError("csv: unexpected header column '" + header[j] + "'");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != d + 1) throw ConfigError("csv line " + std::to_string(line_no) + ": wrong number of fields");
    for (std::size_t j = 0; j < d; ++j) xs.push_back(parse_number(fields[j], line_no));
    ys.push_back(parse_number(fields[d], line_no));
  }
  if (ys.empty()) throw ConfigError("csv: no data rows");
  const auto m = static_cast<Eigen::Index>(ys.size());
  Sample s{Matrix(m, static_cast<Eigen::Index>(d)), Vector(m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.X(i, static_cast<Eigen::Index>(j)) = xs[static_cast<std::size_t>(i) * d + j];
    s.y(i) = ys[static_cast<std::size_t>(i)];
  }
  return s;
}

Sample read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_csv(in);
}

}  // namespace iterreg
