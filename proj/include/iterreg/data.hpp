#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iterreg/kernel.hpp"

namespace iterreg {

// Labeled sample; X holds one point per row.
struct Sample {
  Matrix X;
  Vector y;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }
};

// Rows listed in idx, in that order.
Sample subset(const Sample& s, const std::vector<Eigen::Index>& idx);

// 17 significant digits, the format of every floating field written to disk.
std::string format_double(double v);

// CSV with header x0..x{d-1},y, comma separated, LF line endings.
void write_csv(std::ostream& out, const Sample& s);
void write_csv(const std::filesystem::path& path, const Sample& s);
Sample read_csv(std::istream& in);
Sample read_csv(const std::filesystem::path& path);

}  // namespace iterreg
