#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "gbeam/paraxial.hpp"

namespace gbeam {

struct BeamConfig {
    double source_level = 1.0;  // linear, re 1 m^2
    double frequency = 100.0;   // carrier [Hz]
    double fan_theta = 1e-5;    // [rad]; cancels in the geometric limit
    double fan_phi = 1e-5;      // [rad]
    double r_ref = 1.0;         // [m]
    bool include_density = false;

    void validate() const;
};

/// Geometric transmission loss as a linear power ratio re 1 m^2.
struct TransmissionLoss {
    double value;     // +inf at a caustic
    bool at_caustic;  // q == 0
};

/// TL = c(s) cos(theta0) / (c(z0) r q), times rho(s)/rho(z0) when requested and
/// the profile carries density. r is horizontal distance from the source; |q|
/// is used past caustics. Throws AtSource when r = 0.
TransmissionLoss transmission_loss(const RayPath& path, std::size_t index, double q, bool include_density = false);

/// dt_e = (p / 2q) d_eta^2 [s]. Throws AtCaustic when q = 0.
double transverse_phase_extrinsic(double p, double q, double offset);

/// The same delay written with intrinsic variables:
/// dt_e = (ain'/ain + c' dz/ds) d_mu^2 / 2 with d_mu = d_eta / c.
double transverse_phase_extrinsic(const IntrinsicSpreading& sp, double c, double dc, double dz_ds, double offset);

/// dt_i = (ain'/ain) d_mu^2 / 2 [s], along the normal geodesic. Throws AtCaustic when ain = 0.
double transverse_phase_intrinsic(const IntrinsicSpreading& sp, double offset_time);

/// Wraps to (-pi, pi].
double wrap_phase(double phase);

struct BeamSample {
    std::size_t index = 0;  // path sample
    double s = 0.0;
    double t = 0.0;
    double offset = 0.0;  // d_eta along the extrinsic normal [m]
    double r = 0.0;       // offset point
    double z = 0.0;
    double amplitude = 0.0;            // from (q, p)
    double phase = 0.0;                // 2 pi f (t + dt_e), wrapped
    double amplitude_intrinsic = 0.0;  // from ain
    double phase_intrinsic = 0.0;      // 2 pi f (t + dt_i), wrapped
    double transverse_phase = 0.0;            // 2 pi f dt_e, unwrapped
    double transverse_phase_intrinsic = 0.0;  // 2 pi f dt_i, unwrapped
    bool past_caustic = false;
};

struct BeamField {
    std::vector<BeamSample> samples;
    std::vector<std::size_t> skipped;  // path samples at the source or on a caustic
};

/// Beam amplitude and phase at each path sample and each normal offset.
/// The offset point is x + d_eta N with N = (-dz/ds, dr/ds).
BeamField beam_field(const RayPath& path, std::span<const ExtrinsicSpreading> extrinsic,
                     std::span<const IntrinsicSpreading> intrinsic, const BeamConfig& config,
                     std::span<const double> offsets);

void write_csv(std::ostream& out, const BeamField& field);

}  // namespace gbeam
