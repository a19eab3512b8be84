#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "gbeam/error.hpp"
#include "gbeam/paraxial.hpp"
#include "gbeam/validate.hpp"
#include "test_support.hpp"

using namespace gbeam;
using gbeam::test::kDeg;
using gbeam::test::rel;

namespace {

bool all_pass(const std::vector<OracleReport>& reports) {
    bool ok = true;
    for (const auto& r : reports) {
        if (!r.pass) {
            MESSAGE("FAIL " << r.name << " rel " << r.rel_error << " tol " << r.tolerance << " " << r.note);
            ok = false;
        }
    }
    return ok;
}

}  // namespace

TEST_SUITE("validate") {

TEST_CASE("relative error and compare") {
    CHECK(relative_error(0.0, 0.0) == 0.0);
    CHECK(relative_error(1.0, 2.0) == 0.5);
    CHECK(relative_error(-2.0, 2.0) == 2.0);
    CHECK(relative_error(1e-40, 0.0) == doctest::Approx(1e-10));
    const OracleReport r = compare("x", 1.0, 1.0 + 1e-9, 1e-8);
    CHECK(r.pass);
    CHECK(r.abs_error == doctest::Approx(1e-9));
    CHECK(r.name == "x");
    CHECK_FALSE(compare("y", 1.0, 1.1, 1e-3).pass);
}

TEST_CASE("fd_spreading in a constant profile") {
    const auto flat = SoundSpeedProfile::constant(1500);
    // Truncation is O(d^2) ~ 1e-10; the floor is rounding accumulated in the
    // positions over ~t/step steps, divided by 2d.
    for (double t : {0.5, 3.0}) {
        CHECK(rel(fd_spreading(flat, 1000, 0.4, t), 1500 * t) < 1e-8);
    }
}

TEST_CASE("fd_spreading against the linear closed form, with second-order convergence") {
    const double c0 = 1500, g = 0.05, z0 = 1000, th0 = 12 * kDeg, t = 6.0;
    const auto lin = SoundSpeedProfile::linear(c0, g);
    const RayPath path = trace(lin, 0, z0, th0, Horizon::time(t));
    const double q = linear_spreading_closed_form(c0, g, z0, th0, path.back().state.elevation()).q;
    CHECK(rel(fd_spreading(lin, z0, th0, t), q) < 1e-4);

    const double e1 = std::abs(fd_spreading(lin, z0, th0, t, 2e-2) - q);
    const double e2 = std::abs(fd_spreading(lin, z0, th0, t, 1e-2) - q);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("Gauss lemma residual") {
    const auto flat = SoundSpeedProfile::constant(1500);
    CHECK(std::abs(gauss_lemma_residual(flat, 1000, 0.3, 2.0)) < 1e-8);

    // Munk, two convergence-zone periods (~48 km, ~32 s)
    const auto munk = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650);
    const RayPath path = trace(munk, 0, 1300, 10 * kDeg, Horizon::time(33.0));
    const FanDerivatives fan = fan_derivatives(munk, path, 1300, 10 * kDeg);
    REQUIRE(fan.t.size() == path.size());
    const auto series = gauss_lemma_series(path, fan);
    CHECK(series.front() == 0.0);
    double worst = 0;
    for (double g : series) worst = std::max(worst, std::abs(g));
    CHECK(worst < 1e-4);
    CHECK(path.back().state.r > 2 * 23000.0);

    // O(d^2): quartering the fan width drops it ~16x while above the noise floor
    const double big = std::abs(gauss_lemma_residual(munk, 1300, 10 * kDeg, 8.0, 4e-2));
    const double small = std::abs(gauss_lemma_residual(munk, 1300, 10 * kDeg, 8.0, 1e-2));
    CHECK(big / small == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("fan derivatives and domain exit") {
    const auto bounded = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650, {0.0, 5000.0});
    test::check_error(ErrorCode::DomainExit, [&] { fd_spreading(bounded, 1300, 60 * kDeg, 10.0); });
    test::check_error(ErrorCode::DomainExit, [&] { gauss_lemma_residual(bounded, 1300, 60 * kDeg, 10.0); });
    test::check_error(ErrorCode::InvalidArgument, [&] { fd_spreading(bounded, 1300, 0.1, 1.0, 0.0); });

    const RayPath path = trace(bounded, 0, 1300, 60 * kDeg, Horizon::time(10.0));
    CHECK(path.status() == TraceStatus::DomainExit);
    const FanDerivatives fan = fan_derivatives(bounded, path, 1300, 60 * kDeg);
    CHECK(fan.t.size() <= path.size());
    CHECK(fan.t.size() > 10);
}

TEST_CASE("curvature_fd") {
    CHECK(curvature_fd(SoundSpeedProfile::constant(1500), 300) == 0.0);
    const auto duct = SoundSpeedProfile::cosh_duct(1500, 1000, 1000);
    for (double z : {1000.0, 400.0, 2500.0}) CHECK(rel(curvature_fd(duct, z), 2.25) < 1e-6);

    const std::vector<SoundSpeedProfile> profiles{
        SoundSpeedProfile::linear(1500, 0.05),          SoundSpeedProfile::munk(1500, 0.00737, 1300, 650),
        SoundSpeedProfile::cosh_duct(1500, 1000, 1000), SoundSpeedProfile::sinh_profile(1500, 0, 1000),
        SoundSpeedProfile::cos_profile(1500, 1000, 2000), SoundSpeedProfile::sin_profile(1500, -2000, 2000)};
    for (const auto& p : profiles) {
        CAPTURE(p.name());
        for (double z = 200; z <= 3000; z += 100) {
            CAPTURE(z);
            CHECK(rel(curvature_fd(p, z), p.curvature(z)) < 1e-5);
        }
    }
    const auto bounded = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650, {0.0, 5000.0});
    test::check_error(ErrorCode::OutOfDomain, [&] { curvature_fd(bounded, 0.0); });
    test::check_error(ErrorCode::InvalidArgument, [&] { curvature_fd(bounded, 100.0, -1.0); });
}

TEST_CASE("identity suite: constant profile passes at 1e-8") {
    const auto flat = SoundSpeedProfile::constant(1500);
    const auto reports = identity_suite(flat, 1000, {-30 * kDeg, 5 * kDeg}, Horizon::time(5.0));
    CHECK(all_pass(reports));
    for (const auto& r : reports) {
        CAPTURE(r.name);
        CHECK(r.rel_error < 1e-8);
    }
}

TEST_CASE("identity suite: munk passes at the documented tolerances") {
    const auto munk = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650);
    std::vector<double> angles;
    for (double a : {-30.0, -15.0, -5.0, 5.0, 15.0, 30.0}) angles.push_back(a * kDeg);
    const auto reports = identity_suite(munk, 1300, angles, Horizon::time(20.0), {0.002});
    CHECK(reports.size() > 6 * 8);
    CHECK(all_pass(reports));
}

TEST_CASE("identity suite: cosh duct across caustics") {
    const auto duct = SoundSpeedProfile::cosh_duct(1500, 1000, 1000);
    const auto reports = identity_suite(duct, 1000, {7 * kDeg}, Horizon::range(9000));
    CHECK(all_pass(reports));
    bool has_phase = false;
    for (const auto& r : reports) has_phase |= r.name.find("phase identity") != std::string::npos;
    CHECK(has_phase);
}

TEST_CASE("identity suite aggregates failures instead of throwing") {
    // Source on the boundary: the curvature stencil and the trace both throw.
    const auto bounded = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650, {0.0, 5000.0});
    std::vector<OracleReport> reports;
    CHECK_NOTHROW(reports = identity_suite(bounded, -1.0, {5 * kDeg, 20 * kDeg}, Horizon::time(10.0)));
    REQUIRE(reports.size() == 3);
    for (const auto& r : reports) {
        CHECK_FALSE(r.pass);
        CHECK(std::isnan(r.rel_error));
        CHECK_FALSE(r.note.empty());
    }

    // A tolerance nothing can meet fails the comparisons but keeps the rest.
    SuiteTolerances strict;
    strict.propagators = 0.0;
    const auto munk = SoundSpeedProfile::munk(1500, 0.00737, 1300, 650);
    reports = identity_suite(munk, 1300, {10 * kDeg}, Horizon::time(5.0), {}, strict);
    bool q_failed = false, gauss_passed = false;
    for (const auto& r : reports) {
        if (r.name.find("q (extrinsic) vs c*ain") != std::string::npos) q_failed = !r.pass;
        if (r.name.find("Gauss lemma") != std::string::npos) gauss_passed = r.pass;
    }
    CHECK(q_failed);
    CHECK(gauss_passed);
}

TEST_CASE("report serialisation") {
    std::vector<OracleReport> reports{compare("a", 1.0, 1.0, 1e-6), compare("b", 1.0, 2.0, 1e-6)};
    reports[1].note = "why";
    const auto j = nlohmann::json::parse(reports_to_json(reports));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    CHECK(j[0]["name"] == "a");
    CHECK(j[0]["pass"] == true);
    CHECK(j[1]["pass"] == false);
    CHECK(j[1]["note"] == "why");
    CHECK(j[1]["rel_error"].get<double>() == doctest::Approx(0.5));
    for (const char* key : {"oracle", "candidate", "abs_error", "tolerance"}) CHECK(j[0].contains(key));
    const std::string table = reports_to_table(reports);
    CHECK(table.find("PASS") != std::string::npos);
    CHECK(table.find("FAIL") != std::string::npos);
    CHECK(table.find("(why)") != std::string::npos);
}

}  // TEST_SUITE
