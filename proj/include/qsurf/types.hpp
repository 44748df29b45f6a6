#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// Shared scalar types, physical constants, and the 2D vector used across the
// geometry, mesh, and solver layers. Lengths are carried in micrometers
// internally; converters to/from SI live here so unit handling stays in one
// place.

namespace qsurf {

// SI constants (2019 redefinition; eps0 is the CODATA recommended value).
namespace constants {
inline constexpr double eps0_f_per_m = 8.8541878128e-12;
inline constexpr double elementary_charge_c = 1.602176634e-19;
inline constexpr double planck_j_s = 6.62607015e-34;
inline constexpr double pi = 3.14159265358979323846;
}  // namespace constants

inline constexpr double um_per_m = 1.0e6;
inline constexpr double nm_per_um = 1.0e3;

inline constexpr double um_to_m(double um) { return um * 1.0e-6; }
inline constexpr double m_to_um(double m) { return m * 1.0e6; }
inline constexpr double nm_to_um(double nm) { return nm * 1.0e-3; }
inline constexpr double um_to_nm(double um) { return um * 1.0e3; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    // z-component of the 3D cross product (both vectors in the plane).
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Error taxonomy mirrored by the CLI exit codes. All library errors derive
// from std::runtime_error (or std::invalid_argument for bad arguments) so
// callers can catch coarsely.

struct construction_error : std::runtime_error {
    explicit construction_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct meshing_error : std::runtime_error {
    explicit meshing_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct solve_error : std::runtime_error {
    explicit solve_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct fit_error : std::runtime_error {
    explicit fit_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace qsurf
