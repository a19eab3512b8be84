#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "gbeam/ssp.hpp"

namespace gbeam {

/// Instantaneous ray point. Depth points down; theta = atan2(-zdot, rdot), so
/// a positive launch angle initially decreases z.
struct RayState {
    double r = 0.0;     // [m]
    double z = 0.0;     // [m]
    double rdot = 0.0;  // [m/s]
    double zdot = 0.0;  // [m/s]
    double t = 0.0;     // [s]
    double s = 0.0;     // [m]

    double elevation() const;
};

/// Time derivative of (r, z, rdot, zdot) from the Christoffel ray equations.
struct RayDerivative {
    double dr;
    double dz;
    double d2r;
    double d2z;
};

RayDerivative derivative_time(const SoundSpeedProfile& profile, const RayState& state);

inline constexpr double kDefaultStep = 1e-3;  // [s]

struct Horizon {
    enum class Kind { Time, Arclength, Range };
    Kind kind;
    double value;

    static Horizon time(double t_end) { return {Kind::Time, t_end}; }
    static Horizon arclength(double s_end) { return {Kind::Arclength, s_end}; }
    static Horizon range(double r_end) { return {Kind::Range, r_end}; }
};

enum class TraceStatus {
    Completed,   // reached the horizon
    DomainExit,  // left the profile's valid interval; the last sample sits on the boundary
    TimeLimit,   // arclength/range horizon not reached within the time cap
    Reversed,    // range horizon unreachable: the ray turned back toward the source
};

struct RaySample {
    RayState state;
    SspEval ssp;
    double rddot = 0.0;
    double zddot = 0.0;

    /// Unit tangent components dr/ds and dz/ds.
    double dr_ds() const { return state.rdot / ssp.c; }
    double dz_ds() const { return state.zdot / ssp.c; }
};

struct TraceOptions {
    double step = kDefaultStep;
    double max_time = 3600.0;  // cap for arclength and range horizons [s]
};

/// A traced central ray sampled on a fixed RK4 time grid (the last step may
/// be shortened to land exactly on the horizon or the domain boundary).
class RayPath {
public:
    RayPath() = default;
    RayPath(std::vector<RaySample> samples, TraceStatus status, double launch_angle)
        : samples_(std::move(samples)), status_(status), launch_angle_(launch_angle) {}

    std::size_t size() const { return samples_.size(); }
    const RaySample& operator[](std::size_t i) const { return samples_[i]; }
    const RaySample& front() const { return samples_.front(); }
    const RaySample& back() const { return samples_.back(); }
    const std::vector<RaySample>& samples() const { return samples_; }
    auto begin() const { return samples_.begin(); }
    auto end() const { return samples_.end(); }

    TraceStatus status() const { return status_; }
    double launch_angle() const { return launch_angle_; }

    /// Index k with t_k <= t <= t_{k+1}.
    std::size_t interval_at_time(double t) const;

    /// Cubic Hermite dense output: position from (x, xdot), velocity from
    /// (xdot, xddot), arclength from (s, c).
    RayState at_time(double t) const;

private:
    std::vector<RaySample> samples_;
    TraceStatus status_ = TraceStatus::Completed;
    double launch_angle_ = 0.0;
};

/// Fixed-step classical RK4 integration of the ray equations, launching with
/// (rdot, zdot) = c(z0)(cos theta0, -sin theta0). The tangent is projected back
/// to |xdot| = c after each step.
RayPath trace(const SoundSpeedProfile& profile, double r0, double z0, double theta0, Horizon horizon,
              const TraceOptions& options = {});

/// Starts from an arbitrary state (used for time-reversal checks).
RayPath trace_from(const SoundSpeedProfile& profile, const RayState& start, Horizon horizon,
                   const TraceOptions& options = {});

/// a = cos(theta0) / c(z0)  [s/m]
double snell_invariant(const SoundSpeedProfile& profile, double z0, double theta0);

/// Extrinsic curvature (c'/c)(dr/ds) of the ray path [1/m].
double frenet_curvature(const SoundSpeedProfile& profile, const RayState& state);

/// Fermat metric g = c^-2 I at a depth and its Christoffel symbols of the second kind.
/// Index 0 is range, 1 is depth.
struct FermatMetric {
    std::array<std::array<double, 2>, 2> g{};
    std::array<std::array<std::array<double, 2>, 2>, 2> christoffel{};  // [k][i][j]

    static FermatMetric at(const SoundSpeedProfile& profile, double z);

    /// -Gamma^k_ij xdot^i xdot^j
    std::array<double, 2> geodesic_acceleration(double rdot, double zdot) const;
};

/// Point on a ray in a linear profile c = c0 + gradient z, parameterised by the
/// turning angle theta (0 at launch). Circle centre (-zg tan theta0, -c0/gradient)
/// and radius zg sec theta0 with zg = z0 + c0/gradient, in this module's angle
/// convention.
struct LinearRayPoint {
    double r;
    double z;
    double s;          // arclength [m]
    double t;          // travel time [s]
    double elevation;  // local theta [rad]
};

LinearRayPoint linear_ray_closed_form(double c0, double gradient, double z0, double theta0, double theta);

struct Eigenray {
    double theta0;  // launch angle
    double theta;   // arrival elevation
};

enum class EigenrayMethod {
    RootFinding,     // bisection on the depth miss at the target range
    PrintedFormula,  // the closed form exactly as typeset; kept for comparison only
};

/// Launch and arrival angles of the ray through (r, z). RootFinding bisects
/// the depth miss of the exact circular rays and returns the solution with the
/// smallest |theta0|.
Eigenray linear_eigenray(double c0, double gradient, double z0, double r, double z,
                         EigenrayMethod method = EigenrayMethod::RootFinding);

/// Travel time to depth z on the first arc of the ray (before any turning point).
double linear_travel_time(double c0, double gradient, double z0, double theta0, double z);

/// CSV with columns t,s,r,z,theta,c at 17 significant digits.
void write_csv(std::ostream& out, const RayPath& path);

}  // namespace gbeam
