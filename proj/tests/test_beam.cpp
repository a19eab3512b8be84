#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "gbeam/beam.hpp"
#include "gbeam/error.hpp"
#include "test_support.hpp"

using namespace gbeam;
using gbeam::test::kDeg;
using gbeam::test::rel;

namespace {

struct Traced {
    RayPath path;
    std::vector<ExtrinsicSpreading> ext;
    std::vector<IntrinsicSpreading> jac;
};

Traced run(const SoundSpeedProfile& p, double z0, double theta0, Horizon h) {
    Traced out;
    out.path = trace(p, 0, z0, theta0, h);
    out.ext = propagate_extrinsic(p, out.path);
    out.jac = propagate_jacobi(p, out.path);
    return out;
}

}  // namespace

TEST_SUITE("beam") {

TEST_CASE("config validation") {
    BeamConfig ok;
    CHECK_NOTHROW(ok.validate());
    BeamConfig f = ok;
    f.frequency = 0;
    test::check_error(ErrorCode::InvalidArgument, [&] { f.validate(); });
    BeamConfig sl = ok;
    sl.source_level = -1;
    test::check_error(ErrorCode::InvalidArgument, [&] { sl.validate(); });
}

TEST_CASE("transmission loss in a constant profile") {
    const auto flat = SoundSpeedProfile::constant(1500);
    const Traced axis = run(flat, 1000, 0.0, Horizon::time(4.0));
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < axis.path.size(); k += 50) {
        const double s = axis.path[k].state.s;
        const TransmissionLoss tl = transmission_loss(axis.path, k, axis.ext[k].q);
        CHECK_FALSE(tl.at_caustic);
        CHECK(rel(tl.value, 1 / (s * s)) < 1e-10);
        CHECK(tl.value < last);
        last = tl.value;
    }

    const double th = 25 * kDeg;
    const Traced slant = run(flat, 1000, th, Horizon::time(1.0));
    const std::size_t k = slant.path.size() - 1;
    const double t = slant.path[k].state.t;
    const double r = 1500 * t * std::cos(th);
    CHECK(rel(transmission_loss(slant.path, k, slant.ext[k].q).value, std::cos(th) / (r * 1500 * t)) < 1e-10);
    test::check_error(ErrorCode::AtSource, [&] { transmission_loss(slant.path, 0, 1.0); });
    test::check_error(ErrorCode::GridMismatch, [&] { transmission_loss(slant.path, slant.path.size(), 1.0); });
}

TEST_CASE("caustic transmission loss is flagged, not thrown") {
    const auto duct = SoundSpeedProfile::cosh_duct(1500, 1000, 1000);
    const Traced d = run(duct, 1000, 10 * kDeg, Horizon::time(3.0));
    const TransmissionLoss tl = transmission_loss(d.path, d.path.size() - 1, 0.0);
    CHECK(tl.at_caustic);
    CHECK(std::isinf(tl.value));
}

TEST_CASE("density factor") {
    // rho = 500 + z / 2: rho(1000) = 1000, rho(3000) = 2000
    const auto plain = SoundSpeedProfile::constant(1500);
    const auto dense = plain.with_density(Density({0, 1000, 2000, 3000, 4000}, {500, 1000, 1500, 2000, 2500}));
    const Traced a = run(dense, 1000, -90 * kDeg + 1e-9, Horizon::arclength(2000));
    const std::size_t k = a.path.size() - 1;
    CHECK(std::abs(a.path[k].state.z - 3000) < 1e-6);
    const double with = transmission_loss(a.path, k, a.ext[k].q, true).value;
    const double without = transmission_loss(a.path, k, a.ext[k].q, false).value;
    CHECK(rel(with, 2 * without) < 1e-8);
    const Traced b = run(plain, 1000, -90 * kDeg + 1e-9, Horizon::arclength(2000));
    CHECK(rel(transmission_loss(b.path, b.path.size() - 1, b.ext.back().q, true).value, without) < 1e-12);
}

TEST_CASE("transverse phase") {
    CHECK(transverse_phase_extrinsic(1e-3, 5.0, 0.0) == 0.0);
    // constant profile: p / q = 1 / (c0^2 t)
    const double c0 = 1500, t = 2.0, eta = 30.0;
    CHECK(rel(transverse_phase_extrinsic(1 / c0, c0 * t, eta), eta * eta / (2 * c0 * c0 * t)) < 1e-15);
    CHECK(rel(transverse_phase_intrinsic({t, 1.0}, eta / c0), (eta / c0) * (eta / c0) / (2 * t)) < 1e-15);
    // sphere equator: a quarter period in the duct has ain' = 0
    const auto duct = SoundSpeedProfile::cosh_duct(c0, 1000, 1000);
    const IntrinsicSpreading quarter = closed_form_spreading(duct, std::numbers::pi * 1000 / (2 * c0));
    CHECK(std::abs(transverse_phase_intrinsic(quarter, 0.01)) < 1e-20);
    test::check_error(ErrorCode::AtCaustic, [] { transverse_phase_extrinsic(1.0, 0.0, 1.0); });
    test::check_error(ErrorCode::AtCaustic, [] { transverse_phase_intrinsic({0.0, 1.0}, 1.0); });
    test::check_error(ErrorCode::AtCaustic, [] { transverse_phase_extrinsic({0.0, 1.0}, 1500, 0.1, 0.5, 1.0); });
}

TEST_CASE("extrinsic phase in both variable sets, and the offset from the intrinsic phase") {
    const auto munk = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650);
    for (double th : {-15.0, 8.0}) {
        CAPTURE(th);
        const Traced m = run(munk, 1300, th * kDeg, Horizon::time(30.0));
        double amax = 0;
        for (const auto& j : m.jac) amax = std::max(amax, std::abs(j.ain));
        double worst_forms = 0, worst_offset = 0;
        for (std::size_t k = 1; k < m.path.size(); k += 7) {
            if (std::abs(m.jac[k].ain) < 1e-3 * amax) continue;
            const RaySample& smp = m.path[k];
            const double eta = 40.0;
            const double mu = eta / smp.ssp.c;
            const double a = transverse_phase_extrinsic(m.ext[k].p, m.ext[k].q, eta);
            const double b = transverse_phase_extrinsic(m.jac[k], smp.ssp.c, smp.ssp.dc, smp.dz_ds(), eta);
            worst_forms = std::max(worst_forms, rel(a, b));
            const double gap = a - transverse_phase_intrinsic(m.jac[k], mu);
            const double expect = 0.5 * smp.ssp.dc * smp.dz_ds() * mu * mu;
            worst_offset = std::max(worst_offset, std::abs(gap - expect) / std::max(std::abs(a), std::abs(expect)));
        }
        CHECK(worst_forms < 1e-8);
        CHECK(worst_offset < 1e-8);
    }
}

TEST_CASE("wrap_phase") {
    const double pi = std::numbers::pi;
    CHECK(wrap_phase(0.5) == 0.5);
    CHECK(wrap_phase(pi) == doctest::Approx(pi));
    CHECK(wrap_phase(-pi) == doctest::Approx(pi));
    CHECK(wrap_phase(3 * pi) == doctest::Approx(pi));
    CHECK(wrap_phase(-0.5) == -0.5);
    test::Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-1e4, 1e4);
        const double w = wrap_phase(x);
        CHECK(w > -pi);
        CHECK(w <= pi);
        const double turns = (x - w) / (2 * pi);
        CHECK(std::abs(turns - std::round(turns)) < 1e-9);
    }
}

TEST_CASE("beam field") {
    const auto munk = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650);
    const Traced m = run(munk, 1300, 10 * kDeg, Horizon::time(20.0));
    BeamConfig cfg;
    cfg.frequency = 50;
    cfg.source_level = 3.0;
    const std::vector<double> offsets{-25.0, 0.0, 25.0};
    const BeamField field = beam_field(m.path, m.ext, m.jac, cfg, offsets);
    REQUIRE(field.skipped.size() >= 1);
    CHECK(field.skipped.front() == 0);
    CHECK(field.samples.size() == offsets.size() * (m.path.size() - field.skipped.size()));

    BeamConfig louder = cfg;
    louder.source_level = 6.0;
    const BeamField loud = beam_field(m.path, m.ext, m.jac, louder, offsets);
    REQUIRE(loud.samples.size() == field.samples.size());

    const double omega = 2 * std::numbers::pi * cfg.frequency;
    bool seen_caustic = false;
    for (std::size_t i = 0; i < field.samples.size(); i += 3) {
        const BeamSample& lo = field.samples[i];
        const BeamSample& mid = field.samples[i + 1];
        const BeamSample& hi = field.samples[i + 2];
        const RaySample& smp = m.path[mid.index];
        CHECK(mid.offset == 0.0);
        CHECK(rel(mid.r, smp.state.r) < 1e-15);
        CHECK(mid.z == smp.state.z);
        const TransmissionLoss tl = transmission_loss(m.path, mid.index, m.ext[mid.index].q);
        CHECK(rel(mid.amplitude, std::sqrt(cfg.source_level * tl.value)) < 1e-14);
        CHECK(std::abs(mid.phase - wrap_phase(omega * smp.state.t)) < 1e-12);
        CHECK(rel(lo.amplitude_intrinsic, lo.amplitude) < 1e-10);
        CHECK(lo.phase == doctest::Approx(hi.phase).epsilon(1e-12));
        CHECK(rel(loud.samples[i].amplitude * loud.samples[i].amplitude, 2 * lo.amplitude * lo.amplitude) < 1e-14);
        // offset points sit 25 m along the normal
        CHECK(std::abs(std::hypot(hi.r - smp.state.r, hi.z - smp.state.z) - 25.0) < 1e-9);
        CHECK(std::abs((hi.r - smp.state.r) * smp.dr_ds() + (hi.z - smp.state.z) * smp.dz_ds()) < 1e-9);
        const bool crossed = m.jac[mid.index].ain < 0.0;
        if (crossed) seen_caustic = true;
        if (seen_caustic) CHECK(mid.past_caustic);
    }
    CHECK(seen_caustic);

    std::ostringstream csv;
    write_csv(csv, field);
    std::istringstream lines(csv.str());
    std::string header;
    std::getline(lines, header);
    CHECK(header == "s,eta,r,z,amp,phase");
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == field.samples.size());

    const std::vector<ExtrinsicSpreading> short_ext(2);
    test::check_error(ErrorCode::GridMismatch, [&] { beam_field(m.path, short_ext, m.jac, cfg, offsets); });
}

}  // TEST_SUITE
