#include "gbeam/ray.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "gbeam/error.hpp"
#include "gbeam/format.hpp"

namespace gbeam {

namespace {

// Integrated state: position, velocity and arclength.
struct Vec5 {
    double r, z, rdot, zdot, s;

    Vec5 operator+(const Vec5& o) const { return {r + o.r, z + o.z, rdot + o.rdot, zdot + o.zdot, s + o.s}; }
    Vec5 operator*(double k) const { return {r * k, z * k, rdot * k, zdot * k, s * k}; }
};

Vec5 rhs(const SoundSpeedProfile& profile, const Vec5& y) {
    const SspEval e = profile.eval(y.z);
    const double g = e.dc / e.c;
    return {y.rdot, y.zdot, 2.0 * g * y.rdot * y.zdot, -g * (y.rdot * y.rdot - y.zdot * y.zdot),
            std::hypot(y.rdot, y.zdot)};
}

RaySample make_sample(const SoundSpeedProfile& profile, const RayState& st) {
    RaySample out;
    out.state = st;
    out.ssp = profile.eval(st.z);
    const double g = out.ssp.dc / out.ssp.c;
    out.rddot = 2.0 * g * st.rdot * st.zdot;
    out.zddot = -g * (st.rdot * st.rdot - st.zdot * st.zdot);
    return out;
}

bool is_domain_error(const Error& e) {
    return e.code() == ErrorCode::OutOfDomain || e.code() == ErrorCode::NonPositiveSpeed;
}

// One RK4 step followed by the |xdot| = c projection. Empty if any stage or
// the result leaves the valid interval.
std::optional<RayState> rk4_step(const SoundSpeedProfile& profile, const RayState& st, double h) {
    try {
        const Vec5 y0{st.r, st.z, st.rdot, st.zdot, st.s};
        const Vec5 k1 = rhs(profile, y0);
        const Vec5 k2 = rhs(profile, y0 + k1 * (0.5 * h));
        const Vec5 k3 = rhs(profile, y0 + k2 * (0.5 * h));
        const Vec5 k4 = rhs(profile, y0 + k3 * h);
        const Vec5 y1 = y0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);

        const double c = profile.eval(y1.z).c;
        const double scale = c / std::hypot(y1.rdot, y1.zdot);
        return RayState{y1.r, y1.z, y1.rdot * scale, y1.zdot * scale, st.t + h, y1.s};
    } catch (const Error& e) {
        if (is_domain_error(e)) return std::nullopt;
        throw;
    }
}

double horizon_coordinate(const RayState& st, Horizon::Kind kind) {
    switch (kind) {
        case Horizon::Kind::Time: return st.t;
        case Horizon::Kind::Arclength: return st.s;
        case Horizon::Kind::Range: return st.r;
    }
    return st.t;
}

double horizon_rate(const RayState& st, Horizon::Kind kind) {
    switch (kind) {
        case Horizon::Kind::Time: return 1.0;
        case Horizon::Kind::Arclength: return std::hypot(st.rdot, st.zdot);
        case Horizon::Kind::Range: return st.rdot;
    }
    return 1.0;
}

// Shortened step that lands on the horizon coordinate, by Newton iteration on h.
std::optional<RayState> step_to_horizon(const SoundSpeedProfile& profile, const RayState& st, Horizon horizon,
                                        double h_max) {
    const double target = horizon.value;
    const double gap = target - horizon_coordinate(st, horizon.kind);
    if (horizon.kind == Horizon::Kind::Time) return rk4_step(profile, st, gap);

    double rate = horizon_rate(st, horizon.kind);
    if (!(rate > 0.0)) return std::nullopt;
    double h = std::clamp(gap / rate, 0.0, h_max);
    std::optional<RayState> out;
    for (int it = 0; it < 8; ++it) {
        out = rk4_step(profile, st, h);
        if (!out) return out;
        const double miss = horizon_coordinate(*out, horizon.kind) - target;
        rate = horizon_rate(*out, horizon.kind);
        if (std::abs(miss) <= 1e-12 * std::max(1.0, std::abs(target)) || !(rate > 0.0)) break;
        h = std::clamp(h - miss / rate, 0.0, h_max);
    }
    return out;
}

// Largest partial step that stays in the domain, by bisection on h.
std::optional<RayState> step_to_boundary(const SoundSpeedProfile& profile, const RayState& st, double h) {
    double lo = 0.0;
    double hi = h;
    std::optional<RayState> best;
    for (int it = 0; it < 60 && hi - lo > 1e-14 * h; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (auto next = rk4_step(profile, st, mid)) {
            lo = mid;
            best = next;
        } else {
            hi = mid;
        }
    }
    if (lo < 1e-9 * h) return std::nullopt;
    return best;
}

}  // namespace

double RayState::elevation() const { return std::atan2(-zdot, rdot); }

RayDerivative derivative_time(const SoundSpeedProfile& profile, const RayState& state) {
    const SspEval e = profile.eval(state.z);
    const double g = e.dc / e.c;
    return {state.rdot, state.zdot, 2.0 * g * state.rdot * state.zdot,
            -g * (state.rdot * state.rdot - state.zdot * state.zdot)};
}

std::size_t RayPath::interval_at_time(double t) const {
    if (samples_.size() < 2) throw Error(ErrorCode::GridMismatch, "ray path has fewer than two samples");
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double v, const RaySample& s) { return v < s.state.t; });
    std::size_t k = static_cast<std::size_t>(std::distance(samples_.begin(), it));
    return std::clamp<std::size_t>(k, 1, samples_.size() - 1) - 1;
}

RayState RayPath::at_time(double t) const {
    const std::size_t k = interval_at_time(t);
    const RaySample& a = samples_[k];
    const RaySample& b = samples_[k + 1];
    const double h = b.state.t - a.state.t;
    const double u = (t - a.state.t) / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1;
    const double h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2;
    const double h11 = u3 - u2;
    auto herm = [&](double y0, double d0, double y1, double d1) { return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1; };

    RayState out;
    out.t = t;
    out.r = herm(a.state.r, a.state.rdot, b.state.r, b.state.rdot);
    out.z = herm(a.state.z, a.state.zdot, b.state.z, b.state.zdot);
    out.rdot = herm(a.state.rdot, a.rddot, b.state.rdot, b.rddot);
    out.zdot = herm(a.state.zdot, a.zddot, b.state.zdot, b.zddot);
    out.s = herm(a.state.s, a.ssp.c, b.state.s, b.ssp.c);
    return out;
}

RayPath trace(const SoundSpeedProfile& profile, double r0, double z0, double theta0, Horizon horizon,
              const TraceOptions& options) {
    const double c0 = profile.eval(z0).c;
    RayState start{r0, z0, c0 * std::cos(theta0), -c0 * std::sin(theta0), 0.0, 0.0};
    RayPath path = trace_from(profile, start, horizon, options);
    return RayPath(path.samples(), path.status(), theta0);
}

RayPath trace_from(const SoundSpeedProfile& profile, const RayState& start, Horizon horizon,
                   const TraceOptions& options) {
    const double h = options.step;
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw Error(ErrorCode::InvalidStep, "step must be positive and finite");
    }
    if (!std::isfinite(horizon.value)) throw Error(ErrorCode::InvalidArgument, "horizon must be finite");

    std::vector<RaySample> samples;
    samples.push_back(make_sample(profile, start));  // throws OutOfDomain at t = 0

    const double target = horizon.value;
    TraceStatus status = TraceStatus::Completed;
    const double slack = 1e-12 * std::max(1.0, std::abs(target));

    while (true) {
        const RayState& cur = samples.back().state;
        if (horizon_coordinate(cur, horizon.kind) >= target - slack) break;
        if (horizon.kind != Horizon::Kind::Time && cur.t >= options.max_time) {
            status = TraceStatus::TimeLimit;
            break;
        }
        if (horizon.kind == Horizon::Kind::Range && !(cur.rdot > 0.0)) {
            status = TraceStatus::Reversed;
            break;
        }
        if (horizon.kind == Horizon::Kind::Time && cur.t + h > target - slack) {
            auto last = rk4_step(profile, cur, target - cur.t);
            if (!last) {
                if (auto edge = step_to_boundary(profile, cur, target - cur.t)) samples.push_back(make_sample(profile, *edge));
                status = TraceStatus::DomainExit;
            } else {
                samples.push_back(make_sample(profile, *last));
            }
            break;
        }
        auto next = rk4_step(profile, cur, h);
        if (!next) {
            if (auto edge = step_to_boundary(profile, cur, h)) samples.push_back(make_sample(profile, *edge));
            status = TraceStatus::DomainExit;
            break;
        }
        if (horizon.kind != Horizon::Kind::Time && horizon_coordinate(*next, horizon.kind) > target) {
            if (auto last = step_to_horizon(profile, cur, horizon, h)) {
                samples.push_back(make_sample(profile, *last));
            } else {
                status = TraceStatus::DomainExit;
            }
            break;
        }
        samples.push_back(make_sample(profile, *next));
    }
    return RayPath(std::move(samples), status, start.elevation());
}

double snell_invariant(const SoundSpeedProfile& profile, double z0, double theta0) {
    return std::cos(theta0) / profile.eval(z0).c;
}

double frenet_curvature(const SoundSpeedProfile& profile, const RayState& state) {
    const SspEval e = profile.eval(state.z);
    const double speed = std::hypot(state.rdot, state.zdot);
    if (speed == 0.0) return 0.0;
    return (e.dc / e.c) * (state.rdot / speed);
}

FermatMetric FermatMetric::at(const SoundSpeedProfile& profile, double z) {
    const SspEval e = profile.eval(z);
    const double g = 1.0 / (e.c * e.c);
    const double w = e.dc / e.c;
    FermatMetric m;
    m.g = {{{g, 0.0}, {0.0, g}}};
    m.christoffel[0] = {{{0.0, -w}, {-w, 0.0}}};
    m.christoffel[1] = {{{w, 0.0}, {0.0, -w}}};
    return m;
}

std::array<double, 2> FermatMetric::geodesic_acceleration(double rdot, double zdot) const {
    const std::array<double, 2> v{rdot, zdot};
    std::array<double, 2> acc{};
    for (int k = 0; k < 2; ++k) {
        double sum = 0.0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) sum += christoffel[k][i][j] * v[i] * v[j];
        }
        acc[k] = -sum;
    }
    return acc;
}

LinearRayPoint linear_ray_closed_form(double c0, double gradient, double z0, double theta0, double theta) {
    if (gradient == 0.0) throw Error(ErrorCode::ZeroGradient, "linear closed form needs a nonzero gradient");
    if (!(std::abs(theta0) < 0.5 * std::numbers::pi)) {
        throw Error(ErrorCode::InvalidArgument, "|theta0| must be below pi/2");
    }
    // The circle formulas are written for a launch angle measured positive
    // downward; beta0 is that angle.
    const double beta0 = -theta0;
    const double zg = z0 + c0 / gradient;
    const double radius = zg / std::cos(beta0);

    LinearRayPoint p;
    p.r = radius * (std::sin(beta0) + std::sin(theta - beta0));
    p.z = -c0 / gradient + radius * std::cos(theta - beta0);
    p.s = radius * theta;
    p.elevation = theta - beta0;
    if (!(std::abs(p.elevation) < 0.5 * std::numbers::pi)) {
        throw Error(ErrorCode::InvalidArgument, "turning angle takes the ray past vertical");
    }
    const double pi4 = 0.25 * std::numbers::pi;
    p.t = std::log(std::tan(pi4 - 0.5 * theta0) / std::tan(pi4 - 0.5 * p.elevation)) / gradient;
    return p;
}

namespace {

// Depth at range r on the circular ray launched at theta0, and the local
// elevation there; empty when the ray goes vertical before reaching r.
struct CirclePoint {
    double z;
    double elevation;
};

std::optional<CirclePoint> circle_at_range(double c0, double gradient, double z0, double theta0, double r) {
    const double zg = z0 + c0 / gradient;
    const double radius = zg / std::cos(theta0);
    const double sin_el = r / radius + std::sin(theta0);
    if (!(std::abs(sin_el) < 1.0)) return std::nullopt;
    const double el = std::asin(sin_el);
    return CirclePoint{-c0 / gradient + radius * std::cos(el), el};
}

}  // namespace

Eigenray linear_eigenray(double c0, double gradient, double z0, double r, double z, EigenrayMethod method) {
    if (gradient == 0.0) throw Error(ErrorCode::ZeroGradient, "linear eigenray needs a nonzero gradient");
    const double zg = z0 + c0 / gradient;

    if (method == EigenrayMethod::PrintedFormula) {
        const double a = 2.0 * r * zg - (r * r + (zg - z) * (zg - z)) * (r * r + (zg + z) * (zg + z));
        const double b = zg * zg - z * z - r * r;
        const double beta0 = 2.0 * std::sqrt(std::atan2(a, b));  // NaN when atan2 < 0
        const double theta0 = -beta0;
        const double theta = std::atan2(r - zg * std::tan(beta0), z + c0 / gradient) + beta0;
        return {theta0, theta};
    }

    if (!(r > 0.0)) {
        if (std::abs(z - z0) <= 1e-9 * std::max(1.0, std::abs(z0))) return {0.0, 0.0};
        throw Error(ErrorCode::Unreachable, "target at zero range but different depth");
    }

    // Scan launch angles outward from horizontal; bisect the first bracket of
    // the depth miss, giving the eigenray with the smallest |theta0|.
    const double limit = 89.0 * std::numbers::pi / 180.0;
    constexpr int n = 2000;
    auto miss = [&](double th) -> std::optional<double> {
        const auto p = circle_at_range(c0, gradient, z0, th, r);
        if (!p) return std::nullopt;
        return p->z - z;
    };
    auto refine = [&](double lo, double hi, double mlo) {
        for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
            const double mid = 0.5 * (lo + hi);
            const auto m = miss(mid);
            if (!m) break;
            if ((*m > 0.0) == (mlo > 0.0)) {
                lo = mid;
                mlo = *m;
            } else {
                hi = mid;
            }
        }
        const double th = 0.5 * (lo + hi);
        return Eigenray{th, circle_at_range(c0, gradient, z0, th, r)->elevation};
    };
    for (int side : {1, -1}) {
        std::optional<double> prev = miss(0.0);
        double prev_th = 0.0;
        if (prev && *prev == 0.0) return {0.0, circle_at_range(c0, gradient, z0, 0.0, r)->elevation};
        for (int i = 1; i <= n; ++i) {
            const double th = side * limit * i / n;
            const auto m = miss(th);
            if (m && *m == 0.0) return {th, circle_at_range(c0, gradient, z0, th, r)->elevation};
            if (m && prev && (*m > 0.0) != (*prev > 0.0)) {
                return side > 0 ? refine(prev_th, th, *prev) : refine(th, prev_th, *m);
            }
            prev = m;
            prev_th = th;
        }
    }
    std::ostringstream msg;
    msg << "no launch angle reaches (" << r << ", " << z << ")";
    throw Error(ErrorCode::Unreachable, msg.str());
}

double linear_travel_time(double c0, double gradient, double z0, double theta0, double z) {
    if (gradient == 0.0) throw Error(ErrorCode::ZeroGradient, "linear travel time needs a nonzero gradient");
    const double cz0 = c0 + gradient * z0;
    const double cz = c0 + gradient * z;
    const double arg = cz / cz0 * std::cos(theta0);
    if (!(arg >= -1.0 && arg <= 1.0) || !(cz > 0.0) || !(cz0 > 0.0)) {
        throw Error(ErrorCode::InvalidBranch, "depth not reachable by this ray (a c(z) outside [-1, 1])");
    }
    // First arc only: the depth must lie on the side the ray is launched toward.
    const double heading = -std::sin(theta0);  // sign of dz/dt at launch
    if ((z - z0) * heading < 0.0) {
        throw Error(ErrorCode::InvalidBranch, "depth lies behind the launch direction");
    }
    const double num = std::tan(0.5 * std::asin(std::cos(theta0)));
    const double den = std::tan(0.5 * std::asin(arg));
    // As typeset the ratio is inverted on arcs heading toward faster water;
    // the magnitude is the travel time on either kind of first arc.
    return std::abs(std::log(num / den) / gradient);
}

void write_csv(std::ostream& out, const RayPath& path) {
    out << "t,s,r,z,theta,c\n";
    for (const RaySample& s : path) {
        out << fmt17(s.state.t) << ',' << fmt17(s.state.s) << ',' << fmt17(s.state.r) << ',' << fmt17(s.state.z)
            << ',' << fmt17(s.state.elevation()) << ',' << fmt17(s.ssp.c) << '\n';
    }
}

}  // namespace gbeam
