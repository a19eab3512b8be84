#pragma once

#include <optional>
#include <vector>

#include "gbeam/ray.hpp"

namespace gbeam {

// Snell's-law form of the ray: with a = cos(theta0)/c(z0) fixed, range is a
// function of depth on each monotone leg,
//   r(z) = | int_{z0}^{z} a c / sqrt(1 - a^2 c^2) dz' |.
// Depth is positive downward, theta0 > 0 launches toward smaller z.

/// First depth beyond z0 in the launch direction where a c(z) = 1, if the
/// ray turns inside the profile's valid interval.
std::optional<double> turning_depth(const SoundSpeedProfile& profile, double z0, double theta0);

/// Horizontal range at which the ray reaches depth z after passing `turns`
/// turning points. With turns = 0 the depth must lie on the first leg.
/// Quadrature is adaptive Gauss-Kronrod; legs touching a turning depth z* are
/// integrated in w = sqrt|z* - z|, which removes the inverse-square-root
/// singularity.
double range_integral(const SoundSpeedProfile& profile, double z0, double theta0, double z, int turns = 0);

struct RangeSensitivity {
    double dr_dtheta0;        // (dr/dtheta0) at fixed z [m/rad]
    double depth_derivative;  // d/dz of the above [1/rad]
};

/// Launch-angle derivative of the first-leg range at fixed depth:
///   dr/dtheta0 = -(sin theta0 / c(z0)) int c (1 - a^2 c^2)^{-3/2} |dz'|,
/// and its integrand (with the same prefactor) as the depth derivative.
RangeSensitivity dr_dtheta0_at_z(const SoundSpeedProfile& profile, double z0, double theta0, double z);

struct SnellSpreading {
    double q;      // [m/rad]
    double ain;    // q / c(z) [s/rad]
    double theta;  // local elevation from the Snell invariant
};

/// q = -(dr/dtheta0)_z sin(theta) on the first leg; positive before the first caustic.
SnellSpreading spreading_snell(const SoundSpeedProfile& profile, double z0, double theta0, double z);

/// Transverse phase p/q [s/m^2] from the range sensitivity:
///   p/q = -(R'/R) sin(theta)/c + c' cos^2(theta) / (c^2 sin(theta)),
/// with R = (dr/dtheta0)_z and R' its depth derivative.
double phase_snell(const SoundSpeedProfile& profile, double z0, double theta0, double z);

inline constexpr double kDefaultFanHalfWidth = 1e-5;  // [rad]

/// Spreading from the angle sensitivity of a traced fan at equal arclength:
/// q(s) = int_0^s (dtheta/dtheta0)_s' ds' and c p / q = (dtheta/dtheta0)_s / q.
///
/// That integral drops the term kappa (ds/dtheta0)_t (kappa the Frenet
/// curvature): fan points at equal s are not at equal t, and the normal turns
/// as the ray bends. The error grows like t^3 (1e-3 after 3 s on a 12 degree
/// Munk ray). The *_corrected series restore it, using
/// (ds/dtheta0)_t = -c (dt/dtheta0)_s from the same fan, and then match the ODE q.
struct AngleSpreading {
    std::vector<double> s;
    std::vector<double> dtheta_dtheta0;
    std::vector<double> q;
    std::vector<double> cp_over_q;  // undefined (NaN) at s = 0
    std::vector<double> q_corrected;
    std::vector<double> cp_over_q_corrected;  // dq/ds / q
};

AngleSpreading spreading_angle(const SoundSpeedProfile& profile, double r0, double z0, double theta0,
                               Horizon horizon, const TraceOptions& options = {},
                               double fan_half_width = kDefaultFanHalfWidth);

/// Ray state at a given arclength, from the Hermite dense output.
RayState state_at_arclength(const RayPath& path, double s);

}  // namespace gbeam
