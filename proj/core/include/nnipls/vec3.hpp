#pragma once

#include <array>
#include <cmath>

namespace nnipls {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) {
  a[0] += b[0];
  a[1] += b[1];
  a[2] += b[2];
  return a;
}
inline Vec3& operator-=(Vec3& a, const Vec3& b) {
  a[0] -= b[0];
  a[1] -= b[1];
  a[2] -= b[2];
  return a;
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

namespace units {

// eV, Angstrom, fs, amu are the internal units.
inline constexpr double kBoltzmann = 8.617333262e-5;  // eV/K
// 1 amu * (A/fs)^2 expressed in eV.
inline constexpr double kAmuA2PerFs2InEv = 1.66053906660e-27 * 1.0e10 / 1.602176634e-19;
inline constexpr double kMilli = 1000.0;

}  // namespace units
}  // namespace nnipls
