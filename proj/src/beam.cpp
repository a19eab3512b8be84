#include "gbeam/beam.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "gbeam/error.hpp"
#include "gbeam/format.hpp"

namespace gbeam {

void BeamConfig::validate() const {
    if (!(frequency > 0.0) || !std::isfinite(frequency)) {
        throw Error(ErrorCode::InvalidArgument, "carrier frequency must be positive");
    }
    if (!(source_level > 0.0) || !std::isfinite(source_level)) {
        throw Error(ErrorCode::InvalidArgument, "source level must be positive");
    }
}

namespace {

double density_ratio(const RayPath& path, std::size_t index, bool include_density) {
    if (!include_density) return 1.0;
    const auto& rho_s = path[index].ssp.rho;
    const auto& rho_0 = path.front().ssp.rho;
    if (!rho_s || !rho_0) return 1.0;
    return *rho_s / *rho_0;
}

double horizontal_distance(const RayPath& path, std::size_t index) {
    const double r = std::abs(path[index].state.r - path.front().state.r);
    if (r == 0.0) throw Error(ErrorCode::AtSource, "transmission loss is undefined at zero range");
    return r;
}

}  // namespace

TransmissionLoss transmission_loss(const RayPath& path, std::size_t index, double q, bool include_density) {
    if (index >= path.size()) throw Error(ErrorCode::GridMismatch, "sample index outside path");
    const double r = horizontal_distance(path, index);
    if (q == 0.0) return {std::numeric_limits<double>::infinity(), true};
    const double cs = path[index].ssp.c;
    const double c0 = path.front().ssp.c;
    const double tl = cs * std::cos(path.launch_angle()) / (c0 * r * std::abs(q));
    return {tl * density_ratio(path, index, include_density), false};
}

double transverse_phase_extrinsic(double p, double q, double offset) {
    if (q == 0.0) throw Error(ErrorCode::AtCaustic, "transverse phase is infinite at a caustic");
    return 0.5 * (p / q) * offset * offset;
}

double transverse_phase_extrinsic(const IntrinsicSpreading& sp, double c, double dc, double dz_ds, double offset) {
    if (sp.ain == 0.0) throw Error(ErrorCode::AtCaustic, "transverse phase is infinite at a caustic");
    const double mu = offset / c;
    return 0.5 * (sp.ain_dot / sp.ain + dc * dz_ds) * mu * mu;
}

double transverse_phase_intrinsic(const IntrinsicSpreading& sp, double offset_time) {
    if (sp.ain == 0.0) throw Error(ErrorCode::AtCaustic, "transverse phase is infinite at a caustic");
    return 0.5 * (sp.ain_dot / sp.ain) * offset_time * offset_time;
}

double wrap_phase(double phase) {
    const double w = std::remainder(phase, 2.0 * std::numbers::pi);
    return w <= -std::numbers::pi ? w + 2.0 * std::numbers::pi : w;
}

BeamField beam_field(const RayPath& path, std::span<const ExtrinsicSpreading> extrinsic,
                     std::span<const IntrinsicSpreading> intrinsic, const BeamConfig& config,
                     std::span<const double> offsets) {
    config.validate();
    if (extrinsic.size() != path.size() || intrinsic.size() != path.size()) {
        throw Error(ErrorCode::GridMismatch, "spreading series and path differ in length");
    }
    const double omega = 2.0 * std::numbers::pi * config.frequency;
    const double a = std::cos(path.launch_angle()) / path.front().ssp.c;

    BeamField field;
    int crossings = 0;
    for (std::size_t k = 0; k < path.size(); ++k) {
        const RaySample& smp = path[k];
        if (k > 0 && (intrinsic[k].ain > 0.0) != (intrinsic[k - 1].ain > 0.0) && intrinsic[k - 1].ain != 0.0) {
            ++crossings;
        }
        const double q = extrinsic[k].q;
        const double r = std::abs(smp.state.r - path.front().state.r);
        if (q == 0.0 || intrinsic[k].ain == 0.0 || r == 0.0) {
            field.skipped.push_back(k);
            continue;
        }
        const double rho = density_ratio(path, k, config.include_density);
        const double tl = rho * smp.ssp.c * std::cos(path.launch_angle()) / (path.front().ssp.c * r * std::abs(q));
        const double tl_intrinsic = rho * a / (r * std::abs(intrinsic[k].ain));
        const double dr_ds = smp.dr_ds();
        const double dz_ds = smp.dz_ds();

        for (double eta : offsets) {
            BeamSample b;
            b.index = k;
            b.s = smp.state.s;
            b.t = smp.state.t;
            b.offset = eta;
            b.r = smp.state.r - eta * dz_ds;
            b.z = smp.state.z + eta * dr_ds;
            b.amplitude = std::sqrt(config.source_level * tl);
            b.amplitude_intrinsic = std::sqrt(config.source_level * tl_intrinsic);
            const double dte = transverse_phase_extrinsic(extrinsic[k].p, q, eta);
            const double dti = transverse_phase_intrinsic(intrinsic[k], eta / smp.ssp.c);
            b.transverse_phase = omega * dte;
            b.transverse_phase_intrinsic = omega * dti;
            b.phase = wrap_phase(omega * smp.state.t + b.transverse_phase);
            b.phase_intrinsic = wrap_phase(omega * smp.state.t + b.transverse_phase_intrinsic);
            b.past_caustic = crossings > 0;
            field.samples.push_back(b);
        }
    }
    return field;
}

void write_csv(std::ostream& out, const BeamField& field) {
    out << "s,eta,r,z,amp,phase\n";
    for (const BeamSample& b : field.samples) {
        out << fmt17(b.s) << ',' << fmt17(b.offset) << ',' << fmt17(b.r) << ',' << fmt17(b.z) << ','
            << fmt17(b.amplitude) << ',' << fmt17(b.phase) << '\n';
    }
}

}  // namespace gbeam
