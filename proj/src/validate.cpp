#include "gbeam/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "gbeam/error.hpp"
#include "gbeam/paraxial.hpp"
#include "gbeam/snell.hpp"

namespace gbeam {

double relative_error(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), kRelativeErrorFloor});
    return std::abs(a - b) / scale;
}

OracleReport compare(std::string name, double oracle, double candidate, double tolerance) {
    OracleReport r;
    r.name = std::move(name);
    r.oracle = oracle;
    r.candidate = candidate;
    r.abs_error = std::abs(oracle - candidate);
    r.rel_error = relative_error(oracle, candidate);
    r.tolerance = tolerance;
    r.pass = r.rel_error < tolerance;
    return r;
}

namespace {

// A residual that should vanish: reported against an oracle of zero, with the
// (already normalised) residual as both absolute and relative error.
OracleReport bound(std::string name, double residual, double tolerance) {
    OracleReport r;
    r.name = std::move(name);
    r.oracle = 0.0;
    r.candidate = residual;
    r.abs_error = std::abs(residual);
    r.rel_error = std::abs(residual);
    r.tolerance = tolerance;
    r.pass = std::abs(residual) < tolerance;
    return r;
}

OracleReport failed(std::string name, const std::string& why) {
    OracleReport r;
    r.name = std::move(name);
    r.oracle = std::nan("");
    r.candidate = std::nan("");
    r.abs_error = std::nan("");
    r.rel_error = std::nan("");
    r.pass = false;
    r.note = why;
    return r;
}

struct FanPair {
    RayPath plus;
    RayPath minus;
};

FanPair trace_fan(const SoundSpeedProfile& profile, double r0, double z0, double theta0, Horizon horizon,
                  double d, const TraceOptions& options) {
    if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "fan half-width must be positive");
    return {trace(profile, r0, z0, theta0 + d, horizon, options), trace(profile, r0, z0, theta0 - d, horizon, options)};
}

// Keeps the worst (largest-error) comparison seen.
struct Worst {
    OracleReport report;
    bool any = false;

    void offer(const OracleReport& r) {
        if (!any || r.rel_error > report.rel_error || std::isnan(r.rel_error)) {
            report = r;
            any = true;
        }
    }
};

std::string angle_label(double theta0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.3f deg", theta0 * 180.0 / std::numbers::pi);
    return buf;
}

}  // namespace

double fd_spreading(const SoundSpeedProfile& profile, double z0, double theta0, double t, double fan_half_width,
                    const TraceOptions& options) {
    const FanPair fan = trace_fan(profile, 0.0, z0, theta0, Horizon::time(t), fan_half_width, options);
    if (fan.plus.status() != TraceStatus::Completed || fan.minus.status() != TraceStatus::Completed) {
        throw Error(ErrorCode::DomainExit, "a fan ray leaves the domain before the requested time");
    }
    const RayState& p = fan.plus.back().state;
    const RayState& m = fan.minus.back().state;
    return std::hypot(p.r - m.r, p.z - m.z) / (2.0 * fan_half_width);
}

FanDerivatives fan_derivatives(const SoundSpeedProfile& profile, const RayPath& central, double z0, double theta0,
                               double fan_half_width, const TraceOptions& options) {
    const FanPair fan = trace_fan(profile, central.front().state.r, z0, theta0, Horizon::time(central.back().state.t),
                                  fan_half_width, options);
    FanDerivatives out;
    const std::size_t n = std::min({central.size(), fan.plus.size(), fan.minus.size()});
    for (std::size_t k = 0; k < n; ++k) {
        const double t = central[k].state.t;
        const double tol = 1e-9 * std::max(1.0, std::abs(t));
        if (std::abs(fan.plus[k].state.t - t) > tol || std::abs(fan.minus[k].state.t - t) > tol) break;
        out.t.push_back(t);
        out.dr.push_back((fan.plus[k].state.r - fan.minus[k].state.r) / (2.0 * fan_half_width));
        out.dz.push_back((fan.plus[k].state.z - fan.minus[k].state.z) / (2.0 * fan_half_width));
    }
    return out;
}

double gauss_lemma_residual(const SoundSpeedProfile& profile, double z0, double theta0, double t,
                            double fan_half_width, const TraceOptions& options) {
    const RayPath central = trace(profile, 0.0, z0, theta0, Horizon::time(t), options);
    const FanPair fan = trace_fan(profile, 0.0, z0, theta0, Horizon::time(t), fan_half_width, options);
    if (central.status() != TraceStatus::Completed || fan.plus.status() != TraceStatus::Completed ||
        fan.minus.status() != TraceStatus::Completed) {
        throw Error(ErrorCode::DomainExit, "a fan ray leaves the domain before the requested time");
    }
    const RayState& x = central.back().state;
    const double dr = (fan.plus.back().state.r - fan.minus.back().state.r) / (2.0 * fan_half_width);
    const double dz = (fan.plus.back().state.z - fan.minus.back().state.z) / (2.0 * fan_half_width);
    const double norm = std::hypot(x.rdot, x.zdot) * std::hypot(dr, dz);
    return norm == 0.0 ? 0.0 : (x.rdot * dr + x.zdot * dz) / norm;
}

std::vector<double> gauss_lemma_series(const RayPath& central, const FanDerivatives& fan) {
    std::vector<double> out(fan.t.size(), 0.0);
    for (std::size_t k = 0; k < fan.t.size(); ++k) {
        const RayState& x = central[k].state;
        const double norm = std::hypot(x.rdot, x.zdot) * std::hypot(fan.dr[k], fan.dz[k]);
        out[k] = norm == 0.0 ? 0.0 : (x.rdot * fan.dr[k] + x.zdot * fan.dz[k]) / norm;
    }
    return out;
}

double curvature_fd(const SoundSpeedProfile& profile, double z, double h) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "difference step must be positive");
    const double cm = profile.eval(z - h).c;
    const double c = profile.eval(z).c;
    const double cp = profile.eval(z + h).c;
    const double d2 = (cp - 2.0 * c + cm) / (h * h);
    const double d1 = (cp - cm) / (2.0 * h);
    return c * d2 - d1 * d1;
}

std::vector<OracleReport> identity_suite(const SoundSpeedProfile& profile, double z0,
                                         const std::vector<double>& launch_angles, Horizon horizon,
                                         const TraceOptions& options, const SuiteTolerances& tol) {
    std::vector<OracleReport> reports;
    const std::string pname = profile.name();

    try {
        reports.push_back(compare(pname + ": curvature at source, finite difference vs analytic",
                                  curvature_fd(profile, z0), profile.curvature(z0), tol.curvature));
    } catch (const std::exception& e) {
        reports.push_back(failed(pname + ": curvature at source", e.what()));
    }

    for (double theta0 : launch_angles) {
        const std::string label = pname + " " + angle_label(theta0) + ": ";
        RayPath path;
        std::vector<ExtrinsicSpreading> ext;
        std::vector<IntrinsicSpreading> jac;
        std::vector<CoupledSpreading> cpl;
        try {
            path = trace(profile, 0.0, z0, theta0, horizon, options);
            ext = propagate_extrinsic(profile, path);
            jac = propagate_jacobi(profile, path);
            cpl = propagate_intrinsic_coupled(profile, path);
        } catch (const std::exception& e) {
            reports.push_back(failed(label + "trace and propagate", e.what()));
            continue;
        }

        double max_ain = 0.0;
        for (const auto& j : jac) max_ain = std::max(max_ain, std::abs(j.ain));
        auto outside_band = [&](std::size_t k) { return k > 0 && std::abs(jac[k].ain) > tol.caustic_band * max_ain; };

        Worst q_vs_ain, q_vs_qt, ain_vs_qt, pt_identity, phase_identity;
        for (std::size_t k = 1; k < path.size(); ++k) {
            const RaySample& smp = path[k];
            const double c = smp.ssp.c;
            const double nu = smp.dz_ds();
            pt_identity.offer(compare(label + "p~ (coupled) vs ain' + c' (dz/ds) ain",
                                      jac[k].ain_dot + smp.ssp.dc * nu * jac[k].ain, cpl[k].pt, tol.propagators));
            if (outside_band(k)) {
                const double lhs = c * c * ext[k].p / ext[k].q;
                const double residual = lhs - jac[k].ain_dot / jac[k].ain - smp.ssp.dc * nu;
                OracleReport r = bound(label + "phase identity c^2 p/q - ain'/ain - c' dz/ds", residual / lhs,
                                       tol.phase_identity);
                phase_identity.offer(r);
            }
        }
        // Spreading agreement is judged outside the caustic band, where
        // relative errors of near-zero values are meaningless.
        for (std::size_t k = 1; k < path.size(); ++k) {
            if (!outside_band(k)) continue;
            const double c = path[k].ssp.c;
            q_vs_ain.offer(compare(label + "q (extrinsic) vs c*ain (Jacobi)", c * jac[k].ain, ext[k].q,
                                   tol.propagators));
            q_vs_qt.offer(compare(label + "q (extrinsic) vs c*q~ (coupled)", c * cpl[k].qt, ext[k].q,
                                  tol.propagators));
            ain_vs_qt.offer(compare(label + "ain (Jacobi) vs q~ (coupled)", jac[k].ain, cpl[k].qt, tol.propagators));
        }
        for (Worst* w : {&q_vs_ain, &q_vs_qt, &ain_vs_qt, &pt_identity, &phase_identity}) {
            if (w->any) reports.push_back(w->report);
        }

        try {
            const FanDerivatives fan = fan_derivatives(profile, path, z0, theta0, 1e-5, options);
            Worst fd;
            for (std::size_t k = 1; k < fan.t.size(); ++k) {
                if (!outside_band(k)) continue;
                fd.offer(compare(label + "|q| vs two-ray finite difference", std::hypot(fan.dr[k], fan.dz[k]),
                                 std::abs(ext[k].q), tol.fd_oracle));
            }
            if (fd.any) reports.push_back(fd.report);
            // The residual is a cosine against dx/dtheta0, which vanishes
            // entirely at a caustic; inside the band it is rounding noise.
            const auto gl = gauss_lemma_series(path, fan);
            double worst = 0.0;
            for (std::size_t k = 1; k < gl.size(); ++k) {
                if (outside_band(k)) worst = std::max(worst, std::abs(gl[k]));
            }
            reports.push_back(bound(label + "Gauss lemma residual", worst, tol.gauss_lemma));
        } catch (const std::exception& e) {
            reports.push_back(failed(label + "finite-difference fan", e.what()));
        }

        // Snell form on the first leg, away from the turning point.
        try {
            const double launch_sign = path.front().state.zdot > 0.0 ? 1.0 : -1.0;
            std::size_t leg_end = path.size();
            for (std::size_t k = 1; k < path.size(); ++k) {
                if (path[k].state.zdot * launch_sign <= 0.0) {
                    leg_end = k;
                    break;
                }
            }
            std::vector<std::size_t> eligible;
            for (std::size_t k = 1; k < leg_end; ++k) {
                if (outside_band(k) && std::abs(path[k].dz_ds()) > 0.05) eligible.push_back(k);
            }
            if (eligible.empty()) {
                OracleReport r = bound(label + "Snell-form q and p/q", 0.0, tol.snell);
                r.note = "skipped: no first-leg samples away from the turning point";
                reports.push_back(r);
            } else {
                Worst sq, sp;
                const std::size_t m = std::min(tol.snell_points, eligible.size());
                for (std::size_t i = 0; i < m; ++i) {
                    const std::size_t k = eligible[(m == 1) ? 0 : i * (eligible.size() - 1) / (m - 1)];
                    const double z = path[k].state.z;
                    const SnellSpreading ss = spreading_snell(profile, z0, theta0, z);
                    sq.offer(compare(label + "q (Snell form) vs q (extrinsic)", ext[k].q, ss.q, tol.snell));
                    sp.offer(compare(label + "p/q (Snell form) vs p/q (extrinsic)", ext[k].p / ext[k].q,
                                     phase_snell(profile, z0, theta0, z), tol.snell));
                }
                reports.push_back(sq.report);
                reports.push_back(sp.report);
            }
        } catch (const std::exception& e) {
            reports.push_back(failed(label + "Snell form", e.what()));
        }
    }
    return reports;
}

std::string reports_to_json(const std::vector<OracleReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const OracleReport& r : reports) {
        nlohmann::ordered_json o;
        o["name"] = r.name;
        o["oracle"] = r.oracle;
        o["candidate"] = r.candidate;
        o["abs_error"] = r.abs_error;
        o["rel_error"] = r.rel_error;
        o["tolerance"] = r.tolerance;
        o["pass"] = r.pass;
        if (!r.note.empty()) o["note"] = r.note;
        arr.push_back(std::move(o));
    }
    return arr.dump(2) + "\n";
}

std::string reports_to_table(const std::vector<OracleReport>& reports) {
    std::ostringstream out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-4s  %-10s  %-10s  %s\n", "ok", "rel_err", "tol", "check");
    out << buf;
    for (const OracleReport& r : reports) {
        std::snprintf(buf, sizeof buf, "%-4s  %-10.3e  %-10.3e  %s", r.pass ? "PASS" : "FAIL", r.rel_error,
                      r.tolerance, r.name.c_str());
        out << buf;
        if (!r.note.empty()) out << "  (" << r.note << ")";
        out << '\n';
    }
    return out.str();
}

}  // namespace gbeam
