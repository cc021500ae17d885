#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aqcnn {

using cplx = std::complex<double>;

// Centralized tolerance constants.
namespace tol {
inline constexpr double kNorm = 1e-10;
inline constexpr double kUnitary = 1e-8;
inline constexpr double kOracle = 1e-12;
inline constexpr double kRotation = 1e-8;
inline constexpr double kProbClamp = 1e-12;
}  // namespace tol

// Raised when a file does not parse as the format it claims to be.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what + " (at byte offset " +
                           std::to_string(byte_offset) + ")"),
        offset(byte_offset) {}
  std::size_t offset;
};

}  // namespace aqcnn
