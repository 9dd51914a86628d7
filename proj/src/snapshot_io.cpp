#include "steinflow/snapshot_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace steinflow {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

void write_particles_csv(const std::filesystem::path& path, const Matrix& particles) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (Index j = 0; j < particles.cols(); ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n';
  for (Index i = 0; i < particles.rows(); ++i) {
    for (Index j = 0; j < particles.cols(); ++j) out << (j ? "," : "") << format_double(particles(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

Matrix read_particles_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  const auto cols = static_cast<Index>(std::count(line.begin(), line.end(), ',') + 1);

  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (Index j = 0; j < cols; ++j) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{})
        throw IoError(path.string() + ": bad number on data row " + std::to_string(rows + 1));
      values.push_back(v);
      p = res.ptr;
      if (j + 1 < cols) {
        if (p == end || *p != ',')
          throw IoError(path.string() + ": short data row " + std::to_string(rows + 1));
        ++p;
      }
    }
    if (p != end) throw IoError(path.string() + ": long data row " + std::to_string(rows + 1));
    ++rows;
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

}  // namespace steinflow
