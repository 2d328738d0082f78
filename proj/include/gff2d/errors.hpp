#pragma once
// Error categories that the CLI maps onto exit codes: configuration
// problems (2), capacity refusals (3), and I/O failures (4). Everything
// else surfaces as std::logic_error / std::runtime_error.

#include <stdexcept>
#include <string>

namespace gff2d {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gff2d
