#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gbeam/ray.hpp"

namespace gbeam {

/// Cerveny spreading variables: q [m/rad], p [s/(m rad)].
struct ExtrinsicSpreading {
    double q = 0.0;
    double p = 0.0;
};

/// Jacobi-equation solution ain [s/rad] and its time derivative [1/rad].
struct IntrinsicSpreading {
    double ain = 0.0;
    double ain_dot = 0.0;
};

/// Travel-time-scaled pair (q~, p~) = (q / c, c p).
struct CoupledSpreading {
    double qt = 0.0;
    double pt = 0.0;
};

struct CausticEvent {
    std::size_t index = 0;  // ordinal along the ray, from 0
    double t = 0.0;
    double s = 0.0;
    double r = 0.0;
    double z = 0.0;
};

inline constexpr double kCausticTolerance = 1e-10;  // [s/rad]

/// Second derivative of c along the ray normal: c''(z) (dr/ds)^2.
double c_nn(const SoundSpeedProfile& profile, const RayState& state);

// The propagators below integrate with RK4 on the central ray's own time
// grid. Coefficients at interval midpoints come from the path's cubic Hermite
// dense output. Each returns one value per path sample.

/// dq/dt = c^2 p, dp/dt = -(c_nn / c) q; q(0) = 0, p(0) = 1/c(z0).
/// (The arclength form dq/ds = c p, dp/ds = -(c_nn / c^2) q with ds = c dt.)
std::vector<ExtrinsicSpreading> propagate_extrinsic(const SoundSpeedProfile& profile, const RayPath& path);

/// ain'' + K(z(t)) ain = 0; ain(0) = 0, ain'(0) = 1.
std::vector<IntrinsicSpreading> propagate_jacobi(const SoundSpeedProfile& profile, const RayPath& path);

/// dq~/dt = -c' (dz/ds) q~ + p~, dp~/dt = -c c_nn q~ + c' (dz/ds) p~; (q~, p~)(0) = (0, 1).
/// dz/ds is the depth component of the unit tangent (positive downward).
std::vector<CoupledSpreading> propagate_intrinsic_coupled(const SoundSpeedProfile& profile, const RayPath& path);

CoupledSpreading to_intrinsic(const ExtrinsicSpreading& e, double c);
ExtrinsicSpreading to_extrinsic(const CoupledSpreading& i, double c);

/// Zeros of ain after the source, refined on the Hermite interpolant of
/// (ain, ain') until |ain| < tolerance.
std::vector<CausticEvent> detect_caustics(std::span<const IntrinsicSpreading> spreading, const RayPath& path,
                                          double tolerance = kCausticTolerance);

/// ain(t) for a constant-curvature profile: K^{-1/2} sin(K^{1/2} t), |K|^{-1/2} sinh(|K|^{1/2} t), or t.
/// Throws NotConstantCurvature for other profiles.
IntrinsicSpreading closed_form_spreading(const SoundSpeedProfile& profile, double t);
IntrinsicSpreading closed_form_spreading(double curvature, double t);

/// Closed-form (q, p) in c = c0 + gradient z as a function of the local
/// elevation theta along the first arc:
/// q = (c(z0) / gradient) sec^2(theta0) (sin theta - sin theta0), p = 1 / c(z0).
ExtrinsicSpreading linear_spreading_closed_form(double c0, double gradient, double z0, double theta0,
                                                double theta);

}  // namespace gbeam
