#include "gbeam/paraxial.hpp"

#include <cmath>

#include "gbeam/error.hpp"

namespace gbeam {

namespace {

// y' = A y for a 2-vector.
struct Mat2 {
    double a11, a12, a21, a22;
};

struct Vec2 {
    double x, y;
};

Vec2 apply(const Mat2& m, const Vec2& v) { return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y}; }

Vec2 rk4_linear(const Vec2& y, const Mat2& a0, const Mat2& am, const Mat2& a1, double h) {
    const Vec2 k1 = apply(a0, y);
    const Vec2 k2 = apply(am, {y.x + 0.5 * h * k1.x, y.y + 0.5 * h * k1.y});
    const Vec2 k3 = apply(am, {y.x + 0.5 * h * k2.x, y.y + 0.5 * h * k2.y});
    const Vec2 k4 = apply(a1, {y.x + h * k3.x, y.y + h * k3.y});
    return {y.x + h / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x), y.y + h / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y)};
}

struct Tangent {
    double dr_ds;
    double dz_ds;
};

Tangent unit_tangent(const RayState& st) {
    const double v = std::hypot(st.rdot, st.zdot);
    return {st.rdot / v, st.zdot / v};
}

template <class CoeffFn>
std::vector<Vec2> integrate_on_path(const SoundSpeedProfile& profile, const RayPath& path, Vec2 y0,
                                    CoeffFn coeffs) {
    if (path.size() < 2) throw Error(ErrorCode::GridMismatch, "path needs at least two samples");
    std::vector<Vec2> out;
    out.reserve(path.size());
    out.push_back(y0);
    Mat2 a_left = coeffs(path[0].state, path[0].ssp);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double t0 = path[k].state.t;
        const double h = path[k + 1].state.t - t0;
        if (!(h > 0.0)) throw Error(ErrorCode::GridMismatch, "path times must be strictly increasing");
        const RayState mid = path.at_time(t0 + 0.5 * h);
        const Mat2 a_mid = coeffs(mid, profile.eval(mid.z));
        const Mat2 a_right = coeffs(path[k + 1].state, path[k + 1].ssp);
        out.push_back(rk4_linear(out.back(), a_left, a_mid, a_right, h));
        a_left = a_right;
    }
    return out;
}

}  // namespace

double c_nn(const SoundSpeedProfile& profile, const RayState& state) {
    const SspEval e = profile.eval(state.z);
    const double dr_ds = unit_tangent(state).dr_ds;
    return e.d2c * dr_ds * dr_ds;
}

std::vector<ExtrinsicSpreading> propagate_extrinsic(const SoundSpeedProfile& profile, const RayPath& path) {
    if (path.size() == 0) throw Error(ErrorCode::GridMismatch, "empty path");
    auto coeffs = [](const RayState& st, const SspEval& e) {
        const double dr_ds = unit_tangent(st).dr_ds;
        const double cnn = e.d2c * dr_ds * dr_ds;
        return Mat2{0.0, e.c * e.c, -cnn / e.c, 0.0};
    };
    const auto ys = integrate_on_path(profile, path, {0.0, 1.0 / path.front().ssp.c}, coeffs);
    std::vector<ExtrinsicSpreading> out;
    out.reserve(ys.size());
    for (const Vec2& y : ys) out.push_back({y.x, y.y});
    return out;
}

std::vector<IntrinsicSpreading> propagate_jacobi(const SoundSpeedProfile& profile, const RayPath& path) {
    auto coeffs = [](const RayState&, const SspEval& e) {
        const double k = e.c * e.d2c - e.dc * e.dc;
        return Mat2{0.0, 1.0, -k, 0.0};
    };
    const auto ys = integrate_on_path(profile, path, {0.0, 1.0}, coeffs);
    std::vector<IntrinsicSpreading> out;
    out.reserve(ys.size());
    for (const Vec2& y : ys) out.push_back({y.x, y.y});
    return out;
}

std::vector<CoupledSpreading> propagate_intrinsic_coupled(const SoundSpeedProfile& profile, const RayPath& path) {
    auto coeffs = [](const RayState& st, const SspEval& e) {
        const Tangent tan = unit_tangent(st);
        const double cnn = e.d2c * tan.dr_ds * tan.dr_ds;
        const double w = e.dc * tan.dz_ds;
        return Mat2{-w, 1.0, -e.c * cnn, w};
    };
    const auto ys = integrate_on_path(profile, path, {0.0, 1.0}, coeffs);
    std::vector<CoupledSpreading> out;
    out.reserve(ys.size());
    for (const Vec2& y : ys) out.push_back({y.x, y.y});
    return out;
}

CoupledSpreading to_intrinsic(const ExtrinsicSpreading& e, double c) { return {e.q / c, e.p * c}; }

ExtrinsicSpreading to_extrinsic(const CoupledSpreading& i, double c) { return {i.qt * c, i.pt / c}; }

std::vector<CausticEvent> detect_caustics(std::span<const IntrinsicSpreading> spreading, const RayPath& path,
                                          double tolerance) {
    if (spreading.size() != path.size()) {
        throw Error(ErrorCode::GridMismatch, "spreading series and path differ in length");
    }
    std::vector<CausticEvent> events;
    auto record = [&](double t) {
        const RayState st = path.at_time(t);
        events.push_back({events.size(), t, st.s, st.r, st.z});
    };

    for (std::size_t k = 1; k < spreading.size(); ++k) {
        const double y0 = spreading[k - 1].ain;
        const double y1 = spreading[k].ain;
        if (k > 1 && y0 == 0.0) continue;  // already recorded as an exact sample hit
        if (y1 == 0.0) {
            record(path[k].state.t);
            continue;
        }
        if (k == 1 || (y0 > 0.0) == (y1 > 0.0)) continue;

        // Hermite interpolant of ain on [t0, t1] using ain' as slope.
        const double t0 = path[k - 1].state.t;
        const double h = path[k].state.t - t0;
        const double d0 = spreading[k - 1].ain_dot;
        const double d1 = spreading[k].ain_dot;
        auto interp = [&](double u) {
            const double u2 = u * u;
            const double u3 = u2 * u;
            return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * h * d0 + (-2 * u3 + 3 * u2) * y1 +
                   (u3 - u2) * h * d1;
        };
        double lo = 0.0;
        double hi = 1.0;
        double ylo = y0;
        double u = 0.5;
        for (int it = 0; it < 200; ++it) {
            u = 0.5 * (lo + hi);
            const double y = interp(u);
            if (std::abs(y) < tolerance || (hi - lo) * h < 1e-15) break;
            if ((y > 0.0) == (ylo > 0.0)) {
                lo = u;
                ylo = y;
            } else {
                hi = u;
            }
        }
        record(t0 + u * h);
    }
    return events;
}

IntrinsicSpreading closed_form_spreading(double curvature, double t) {
    if (curvature > 0.0) {
        const double w = std::sqrt(curvature);
        return {std::sin(w * t) / w, std::cos(w * t)};
    }
    if (curvature < 0.0) {
        const double w = std::sqrt(-curvature);
        return {std::sinh(w * t) / w, std::cosh(w * t)};
    }
    return {t, 1.0};
}

IntrinsicSpreading closed_form_spreading(const SoundSpeedProfile& profile, double t) {
    const auto k = profile.constant_curvature();
    if (!k) throw Error(ErrorCode::NotConstantCurvature, profile.name() + " does not have constant curvature");
    return closed_form_spreading(*k, t);
}

ExtrinsicSpreading linear_spreading_closed_form(double c0, double gradient, double z0, double theta0,
                                                double theta) {
    if (gradient == 0.0) throw Error(ErrorCode::ZeroGradient, "linear closed form needs a nonzero gradient");
    const double cs = c0 + gradient * z0;
    const double sec0 = 1.0 / std::cos(theta0);
    return {cs / gradient * sec0 * sec0 * (std::sin(theta) - std::sin(theta0)), 1.0 / cs};
}

}  // namespace gbeam
