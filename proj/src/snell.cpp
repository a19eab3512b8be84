#include "gbeam/snell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gbeam/error.hpp"

namespace gbeam {

namespace {

constexpr double kQuadTolerance = 1e-12;  // relative; keeps the absolute error well under 1e-6 m
constexpr unsigned kQuadDepth = 20;
constexpr double kMaxSearch = 1e7;  // [m]
// |sin theta| below this counts as the turning point; the first-leg
// sensitivity integral is not integrable there.
constexpr double kTurningSine = 1e-6;

template <class F>
double gk(F f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    // Slivers left by splitting at a rounded midpoint: the relative error test
    // never passes on them and the recursion runs to full depth.
    if (hi - lo <= 1e-12 * std::max(std::abs(lo), std::abs(hi))) return 0.5 * (f(lo) + f(hi)) * (hi - lo);
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, kQuadDepth, kQuadTolerance);
}

int launch_direction(double theta0) { return std::sin(theta0) > 0.0 ? -1 : 1; }

std::optional<double> speed_at(const SoundSpeedProfile& profile, double z) {
    if (!profile.domain().contains(z)) return std::nullopt;
    try {
        return profile.eval(z).c;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::OutOfDomain || e.code() == ErrorCode::NonPositiveSpeed) return std::nullopt;
        throw;
    }
}

// First depth from z_start moving in direction sigma where a c(z) reaches 1.
std::optional<double> find_turning(const SoundSpeedProfile& profile, double a, double z_start, int sigma) {
    if (!(a > 0.0)) return std::nullopt;
    const DepthInterval& dom = profile.domain();
    const double edge = sigma > 0 ? dom.hi : dom.lo;

    double z = z_start;
    double step = 0.1;
    while (std::abs(z - z_start) < kMaxSearch) {
        double zn = z + sigma * step;
        bool at_edge = false;
        if ((zn - edge) * sigma >= 0.0) {
            zn = edge;
            at_edge = true;
        }
        const auto c = speed_at(profile, zn);
        if (!c) return std::nullopt;
        if (a * *c >= 1.0) {
            double lo = z;  // a c < 1
            double hi = zn;
            for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (a * profile.eval(mid).c >= 1.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return lo;
        }
        if (at_edge) return std::nullopt;
        z = zn;
        step = std::max(0.1, 1e-3 * std::abs(z - z_start));
    }
    return std::nullopt;
}

// Range integrand in the variable w = sqrt|zt - z|, including the Jacobian 2w.
// The invariant is taken as 1 / c(zt) so that the integrand vanishes exactly at
// the computed zt: with the given a, an error dz in zt shifts the range by
// O(sqrt(dz)), which is ~1e-3 m at double precision. The change in a itself is
// O(1e-13) relative. Close to zt the speed difference is expanded to second
// order to avoid cancellation.
double range_integrand_w(const SoundSpeedProfile& profile, double zt, int toward, double w) {
    constexpr double kTaylorBand = 1e-2;  // [m] in w^2
    const SspEval et = profile.eval(zt);
    const double w2 = w * w;
    const double z = zt - toward * w2;
    const double c = profile.eval(z).c;
    const double gap = w2 < kTaylorBand ? toward * et.dc * w2 - 0.5 * et.d2c * w2 * w2 : et.c - c;
    if (w == 0.0 || !(gap > 0.0)) {
        // limit w -> 0: c(zt) - c ~ |c'| w^2
        return et.dc == 0.0 ? 0.0 : std::sqrt(2.0 * et.c / std::abs(et.dc));
    }
    return 2.0 * w * c / std::sqrt(gap * (et.c + c));
}

// Integral over [z1, z2] of the range integrand between two optional turning
// depths; each piece is substituted about its nearer turning depth.
double leg_range(const SoundSpeedProfile& profile, double a, double z1, double z2, std::optional<double> za,
                 std::optional<double> zb) {
    const double lo = std::min(z1, z2);
    const double hi = std::max(z1, z2);
    if (hi <= lo) return 0.0;

    auto about = [&](double zt, double from, double to) {
        // from, to on the same side of zt
        const int toward = zt > from ? 1 : -1;  // direction from the interior to zt
        const double w1 = std::sqrt(std::abs(zt - from));
        const double w2 = std::sqrt(std::abs(zt - to));
        return gk([&](double w) { return range_integrand_w(profile, zt, toward, w); }, std::min(w1, w2),
                  std::max(w1, w2));
    };

    if (!za && !zb) {
        return gk(
            [&](double z) {
                const double c = profile.eval(z).c;
                return a * c / std::sqrt(1.0 - a * a * c * c);
            },
            lo, hi);
    }
    if (za && zb) {
        const double m = 0.5 * (*za + *zb);
        const double near_hi = std::max(*za, *zb);
        const double near_lo = std::min(*za, *zb);
        double total = 0.0;
        if (lo < m) total += about(near_lo, std::min(hi, m), lo);
        if (hi > m) total += about(near_hi, std::max(lo, m), hi);
        return total;
    }
    const double zt = za ? *za : *zb;
    return about(zt, lo, hi);
}

struct LaunchData {
    double a;
    double c0;
    int sigma;
};

LaunchData launch(const SoundSpeedProfile& profile, double z0, double theta0) {
    if (std::sin(theta0) == 0.0) {
        throw Error(ErrorCode::HorizontalRay, "a horizontal launch has no depth parameterisation");
    }
    const double c0 = profile.eval(z0).c;
    return {std::cos(theta0) / c0, c0, launch_direction(theta0)};
}

// Checks that z lies on the first leg; returns the turning depth, if any.
std::optional<double> check_first_leg(const SoundSpeedProfile& profile, const LaunchData& l, double z0, double z) {
    profile.eval(z);
    if ((z - z0) * l.sigma < 0.0) {
        throw Error(ErrorCode::TurningPointInsideLeg, "depth lies behind the launch direction");
    }
    const auto za = find_turning(profile, l.a, z0, l.sigma);
    if (za && (z - *za) * l.sigma > 0.0) {
        throw Error(ErrorCode::TurningPointInsideLeg, "depth lies beyond the first turning point");
    }
    return za;
}

}  // namespace

std::optional<double> turning_depth(const SoundSpeedProfile& profile, double z0, double theta0) {
    const double c0 = profile.eval(z0).c;
    return find_turning(profile, std::cos(theta0) / c0, z0, launch_direction(theta0));
}

double range_integral(const SoundSpeedProfile& profile, double z0, double theta0, double z, int turns) {
    if (turns < 0) throw Error(ErrorCode::InvalidArgument, "turns must be non-negative");
    const LaunchData l = launch(profile, z0, theta0);
    if (turns == 0) {
        const auto za = check_first_leg(profile, l, z0, z);
        return leg_range(profile, l.a, z0, z, za, std::nullopt);
    }

    profile.eval(z);
    const auto za = find_turning(profile, l.a, z0, l.sigma);
    if (!za) throw Error(ErrorCode::Unreachable, "ray has no turning point in the launch direction");
    const auto zb = find_turning(profile, l.a, z0, -l.sigma);
    if (turns >= 2 && !zb) throw Error(ErrorCode::Unreachable, "ray does not turn a second time");
    if ((z - *za) * l.sigma > 0.0 || (zb && (z - *zb) * l.sigma < 0.0)) {
        throw Error(ErrorCode::Unreachable, "depth lies outside the ray's turning depths");
    }

    double total = leg_range(profile, l.a, z0, *za, za, zb);
    if (turns >= 2) total += (turns - 1) * leg_range(profile, l.a, *za, *zb, za, zb);
    const double last = (turns % 2 == 1) ? *za : *zb;
    total += leg_range(profile, l.a, last, z, za, zb);
    return total;
}

RangeSensitivity dr_dtheta0_at_z(const SoundSpeedProfile& profile, double z0, double theta0, double z) {
    const LaunchData l = launch(profile, z0, theta0);
    check_first_leg(profile, l, z0, z);

    auto integrand = [&](double zz) {
        const double c = profile.eval(zz).c;
        const double u2 = 1.0 - l.a * l.a * c * c;
        if (!(u2 > 0.0)) throw Error(ErrorCode::TurningPoint, "range sensitivity is singular at a turning point");
        return c / (u2 * std::sqrt(u2));
    };
    const double prefactor = -std::sin(theta0) / l.c0;
    const double integral = gk(integrand, std::min(z0, z), std::max(z0, z));
    return {prefactor * integral, prefactor * integrand(z) * l.sigma};
}

SnellSpreading spreading_snell(const SoundSpeedProfile& profile, double z0, double theta0, double z) {
    const LaunchData l = launch(profile, z0, theta0);
    const double c = profile.eval(z).c;
    const double cos_t = l.a * c;
    const double sin_abs = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    if (sin_abs < kTurningSine) throw Error(ErrorCode::TurningPoint, "Snell-form spreading is singular at a turning point");
    const double sin_t = std::copysign(sin_abs, std::sin(theta0));

    const RangeSensitivity rs = dr_dtheta0_at_z(profile, z0, theta0, z);
    const double q = -rs.dr_dtheta0 * sin_t;
    return {q, q / c, std::atan2(sin_t, cos_t)};
}

double phase_snell(const SoundSpeedProfile& profile, double z0, double theta0, double z) {
    const LaunchData l = launch(profile, z0, theta0);
    const SspEval e = profile.eval(z);
    const double cos_t = l.a * e.c;
    const double sin_abs = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    if (sin_abs < kTurningSine) throw Error(ErrorCode::TurningPoint, "Snell-form phase is singular at a turning point");
    const double sin_t = std::copysign(sin_abs, std::sin(theta0));

    const RangeSensitivity rs = dr_dtheta0_at_z(profile, z0, theta0, z);
    if (rs.dr_dtheta0 == 0.0) throw Error(ErrorCode::AtSource, "transverse phase is undefined at the source");
    return -(rs.depth_derivative / rs.dr_dtheta0) * sin_t / e.c + e.dc * cos_t * cos_t / (e.c * e.c * sin_t);
}

RayState state_at_arclength(const RayPath& path, double s) {
    if (path.size() < 2) throw Error(ErrorCode::GridMismatch, "path has fewer than two samples");
    const double s_first = path.front().state.s;
    const double s_last = path.back().state.s;
    const double slack = 1e-9 * std::max(1.0, std::abs(s_last));
    if (s < s_first - slack || s > s_last + slack) {
        throw Error(ErrorCode::GridMismatch, "arclength outside the traced path");
    }
    auto it = std::upper_bound(path.begin(), path.end(), s,
                               [](double v, const RaySample& smp) { return v < smp.state.s; });
    std::size_t k = static_cast<std::size_t>(std::distance(path.begin(), it));
    k = std::clamp<std::size_t>(k, 1, path.size() - 1) - 1;

    const RaySample& a = path[k];
    const RaySample& b = path[k + 1];
    double t = a.state.t + (s - a.state.s) / a.ssp.c;
    t = std::clamp(t, a.state.t, b.state.t);
    RayState st = path.at_time(t);
    for (int it2 = 0; it2 < 8; ++it2) {
        const double miss = st.s - s;
        if (std::abs(miss) <= 1e-13 * std::max(1.0, std::abs(s))) break;
        t -= miss / std::hypot(st.rdot, st.zdot);
        st = path.at_time(t);
    }
    return st;
}

AngleSpreading spreading_angle(const SoundSpeedProfile& profile, double r0, double z0, double theta0,
                               Horizon horizon, const TraceOptions& options, double fan_half_width) {
    if (!(fan_half_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "fan half-width must be positive");
    const RayPath central = trace(profile, r0, z0, theta0, horizon, options);
    const double s_end = central.back().state.s;

    TraceOptions fan_options = options;
    fan_options.max_time = std::max(options.max_time, 2.0 * central.back().state.t + 10.0);
    const RayPath plus = trace(profile, r0, z0, theta0 + fan_half_width, Horizon::arclength(s_end), fan_options);
    const RayPath minus = trace(profile, r0, z0, theta0 - fan_half_width, Horizon::arclength(s_end), fan_options);
    if (plus.status() != TraceStatus::Completed || minus.status() != TraceStatus::Completed) {
        throw Error(ErrorCode::DegenerateFan, "fan rays leave the domain before the central ray");
    }

    AngleSpreading out;
    const std::size_t n = central.size();
    out.s.resize(n);
    out.dtheta_dtheta0.resize(n);
    out.q.resize(n);
    out.cp_over_q.resize(n);
    out.q_corrected.resize(n);
    out.cp_over_q_corrected.resize(n);
    std::vector<double> slope(n);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < n; ++k) {
        const RaySample& smp = central[k];
        const double s = smp.state.s;
        const RayState sp = state_at_arclength(plus, s);
        const RayState sm = state_at_arclength(minus, s);
        out.s[k] = s;
        out.dtheta_dtheta0[k] = (sp.elevation() - sm.elevation()) / (2.0 * fan_half_width);
        const double ds_dtheta0 = -smp.ssp.c * (sp.t - sm.t) / (2.0 * fan_half_width);
        slope[k] = out.dtheta_dtheta0[k] + frenet_curvature(profile, smp.state) * ds_dtheta0;
        if (k == 0) {
            out.q[k] = 0.0;
            out.q_corrected[k] = 0.0;
        } else {
            const double h = s - out.s[k - 1];
            out.q[k] = out.q[k - 1] + 0.5 * (out.dtheta_dtheta0[k] + out.dtheta_dtheta0[k - 1]) * h;
            out.q_corrected[k] = out.q_corrected[k - 1] + 0.5 * (slope[k] + slope[k - 1]) * h;
        }
        out.cp_over_q[k] = k == 0 ? nan : out.dtheta_dtheta0[k] / out.q[k];
        out.cp_over_q_corrected[k] = k == 0 ? nan : slope[k] / out.q_corrected[k];
    }
    return out;
}

}  // namespace gbeam
