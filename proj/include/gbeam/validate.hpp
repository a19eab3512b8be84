#pragma once

#include <string>
#include <vector>

#include "gbeam/ray.hpp"

namespace gbeam {

inline constexpr double kRelativeErrorFloor = 1e-30;

/// |a - b| / max(|a|, |b|, 1e-30)
double relative_error(double a, double b);

struct OracleReport {
    std::string name;
    double oracle = 0.0;
    double candidate = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

OracleReport compare(std::string name, double oracle, double candidate, double tolerance);

// Oracles below use only ray tracing or raw sound-speed values, never the
// paraxial propagators or analytic derivatives they are used to check.

/// ||x(t; theta0 + d) - x(t; theta0 - d)|| / 2d, the norm of the fixed-time
/// launch-angle derivative. Throws DomainExit if a fan ray leaves the domain.
double fd_spreading(const SoundSpeedProfile& profile, double z0, double theta0, double t,
                    double fan_half_width = 1e-5, const TraceOptions& options = {});

/// Central-difference partials (dr/dtheta0, dz/dtheta0) at fixed time on the
/// grid of the central ray (the fan shares the fixed time step). Entries stop
/// where either fan ray stops.
struct FanDerivatives {
    std::vector<double> t;
    std::vector<double> dr;
    std::vector<double> dz;
};

FanDerivatives fan_derivatives(const SoundSpeedProfile& profile, const RayPath& central, double z0, double theta0,
                               double fan_half_width = 1e-5, const TraceOptions& options = {});

/// Fermat inner product of xdot and dx/dtheta0 at time t, normalised by the
/// product of their Fermat norms (a cosine; zero by Gauss's lemma).
double gauss_lemma_residual(const SoundSpeedProfile& profile, double z0, double theta0, double t,
                            double fan_half_width = 1e-5, const TraceOptions& options = {});

/// Same residual at every sample of a traced ray (0 at the source).
std::vector<double> gauss_lemma_series(const RayPath& central, const FanDerivatives& fan);

inline constexpr double kDefaultCurvatureStep = 0.25;  // [m]

/// K = c c'' - c'^2 from central differences of c alone.
double curvature_fd(const SoundSpeedProfile& profile, double z, double h = kDefaultCurvatureStep);

struct SuiteTolerances {
    double propagators = 1e-6;       // extrinsic, Jacobi, coupled against each other
    double snell = 1e-4;             // Snell-form q and p/q against the ODEs
    double fd_oracle = 1e-3;         // ODE spreading against two-ray differencing
    double phase_identity = 1e-6;    // c^2 p/q - ain'/ain - c' dz/ds
    double gauss_lemma = 1e-4;
    double curvature = 1e-5;
    double caustic_band = 1e-3;      // exclude |ain| <= band * max|ain| from ratio checks
    std::size_t snell_points = 16;   // Snell-form evaluations per ray
};

/// Cross-formulation comparisons for each launch angle. Each report carries
/// the worst case along the ray. Per-item failures become failed reports.
std::vector<OracleReport> identity_suite(const SoundSpeedProfile& profile, double z0,
                                         const std::vector<double>& launch_angles, Horizon horizon,
                                         const TraceOptions& options = {}, const SuiteTolerances& tol = {});

std::string reports_to_json(const std::vector<OracleReport>& reports);
std::string reports_to_table(const std::vector<OracleReport>& reports);

}  // namespace gbeam
