#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "steinflow/types.hpp"

namespace steinflow {

// File could not be opened, written or parsed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal form that parses back to the same double; independent of
// the global locale.
std::string format_double(double value);

// Header x0,...,x{d-1}, then one row per particle.
void write_particles_csv(const std::filesystem::path& path, const Matrix& particles);
Matrix read_particles_csv(const std::filesystem::path& path);

}  // namespace steinflow
