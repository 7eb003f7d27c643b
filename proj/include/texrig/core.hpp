// core.hpp — shared scalar/vector aliases, error types, deterministic RNG.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace texrig {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Faces with 3D area at or below this are rejected at load: the rest edge
// matrix becomes numerically singular in double precision below it.
inline constexpr double kDegenerateAreaTol = 1e-12;  // m^2

enum class ErrorKind {
  TopologyMismatch,
  DegenerateFace,
  IndexOutOfRange,
  AllNeighborsInvalid,
  ZeroQuaternion,
  NonPSD,
  ShapeMismatch,
  ImageTooSmall,
  ParseError,
  MissingUV,
  IoError,
  NoSeams,
  NonFiniteLoss,
  ConfigError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Process exit code class: 2 = data error, 3 = numeric failure.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::AllNeighborsInvalid:
      case ErrorKind::ZeroQuaternion:
      case ErrorKind::NonPSD:
      case ErrorKind::NonFiniteLoss:
        return 3;
      default:
        return 2;
    }
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

const char* error_kind_name(ErrorKind kind);

// Seeded generator with explicit bit-to-double mapping. std::uniform_real_distribution
// is implementation-defined, which would break byte-identical artifacts across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t raw() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; second sample cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // inclusive on both ends
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int k = static_cast<int>(uniform() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

  Vec3 uniform_vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) {
  const double q = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

}  // namespace texrig
