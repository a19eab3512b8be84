#include "gbeam/ssp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "gbeam/error.hpp"

namespace gbeam {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidProfile, std::string(what) + " must be positive and finite");
    }
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidProfile, std::string(what) + " must be finite");
    }
}

// Speed, slope and second derivative, each from the closed form.
SspEval eval_model(const ProfileModel& m, double z) {
    return std::visit(
        Overloaded{
            [](const model::Constant& p) { return SspEval{p.c0, 0.0, 0.0, {}, {}}; },
            [z](const model::Linear& p) { return SspEval{p.c0 + p.gradient * z, p.gradient, 0.0, {}, {}}; },
            [z](const model::Munk& p) {
                const double u = (z - p.axis) / p.scale;
                const double e = std::exp(-u);
                return SspEval{p.c0 * (1.0 + p.epsilon * (u + e - 1.0)),
                               p.c0 * p.epsilon * (1.0 - e) / p.scale,
                               p.c0 * p.epsilon * e / (p.scale * p.scale), {}, {}};
            },
            [z](const model::CoshDuct& p) {
                const double u = (z - p.axis) / p.scale;
                return SspEval{p.c0 * std::cosh(u), p.c0 * std::sinh(u) / p.scale,
                               p.c0 * std::cosh(u) / (p.scale * p.scale), {}, {}};
            },
            [z](const model::Sinh& p) {
                const double u = (z - p.axis) / p.scale;
                return SspEval{p.c0 * std::sinh(u), p.c0 * std::cosh(u) / p.scale,
                               p.c0 * std::sinh(u) / (p.scale * p.scale), {}, {}};
            },
            [z](const model::Cos& p) {
                const double u = (z - p.axis) / p.scale;
                return SspEval{p.c0 * std::cos(u), -p.c0 * std::sin(u) / p.scale,
                               -p.c0 * std::cos(u) / (p.scale * p.scale), {}, {}};
            },
            [z](const model::Sin& p) {
                const double u = (z - p.axis) / p.scale;
                return SspEval{p.c0 * std::sin(u), p.c0 * std::cos(u) / p.scale,
                               -p.c0 * std::sin(u) / (p.scale * p.scale), {}, {}};
            },
            [z](const model::Tabulated& p) {
                const Jet j = p.speed.eval(z);
                return SspEval{j.value, j.d1, j.d2, {}, {}};
            },
        },
        m);
}

// Where the closed form itself is positive.
DepthInterval positivity_interval(const ProfileModel& m) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr double pi = std::numbers::pi;
    return std::visit(
        Overloaded{
            [](const model::Constant&) { return DepthInterval{}; },
            [](const model::Linear& p) {
                if (p.gradient > 0.0) return DepthInterval{-p.c0 / p.gradient, inf};
                if (p.gradient < 0.0) return DepthInterval{-inf, -p.c0 / p.gradient};
                return DepthInterval{};
            },
            [](const model::Munk&) { return DepthInterval{}; },
            [](const model::CoshDuct&) { return DepthInterval{}; },
            [](const model::Sinh& p) { return DepthInterval{p.axis, inf}; },
            [](const model::Cos& p) {
                return DepthInterval{p.axis - 0.5 * pi * p.scale, p.axis + 0.5 * pi * p.scale};
            },
            [](const model::Sin& p) { return DepthInterval{p.axis, p.axis + pi * p.scale}; },
            [](const model::Tabulated& p) { return DepthInterval{p.speed.front(), p.speed.back()}; },
        },
        m);
}

}  // namespace

DepthInterval DepthInterval::intersect(const DepthInterval& o) const {
    return DepthInterval{std::max(lo, o.lo), std::min(hi, o.hi)};
}

Density::Density(double rho) : rep_(rho) { require_positive(rho, "density"); }

Density::Density(std::vector<double> depths, std::vector<double> rho)
    : rep_(CubicSpline(depths, rho)) {
    for (double r : rho) require_positive(r, "density sample");
}

Jet Density::eval(double z) const {
    if (const double* rho = std::get_if<double>(&rep_)) return Jet{*rho, 0.0, 0.0};
    return std::get<CubicSpline>(rep_).eval(z);
}

SoundSpeedProfile::SoundSpeedProfile(ProfileModel m, DepthInterval domain)
    : model_(std::move(m)), domain_(domain.intersect(positivity_interval(model_))) {
    if (!(domain_.lo < domain_.hi)) {
        throw Error(ErrorCode::InvalidProfile, "empty valid depth interval");
    }
}

SoundSpeedProfile SoundSpeedProfile::constant(double c0, DepthInterval domain) {
    require_positive(c0, "c0");
    return {model::Constant{c0}, domain};
}

SoundSpeedProfile SoundSpeedProfile::linear(double c0, double gradient, DepthInterval domain) {
    require_finite(c0, "c0");
    require_finite(gradient, "gradient");
    return {model::Linear{c0, gradient}, domain};
}

SoundSpeedProfile SoundSpeedProfile::munk(double c0, double epsilon, double axis, double scale,
                                          DepthInterval domain) {
    require_positive(c0, "c0");
    require_finite(epsilon, "epsilon");
    require_finite(axis, "axis depth");
    require_positive(scale, "scale depth");
    return {model::Munk{c0, epsilon, axis, scale}, domain};
}

SoundSpeedProfile SoundSpeedProfile::cosh_duct(double c0, double axis, double scale, DepthInterval domain) {
    require_positive(c0, "c0");
    require_finite(axis, "axis depth");
    require_positive(scale, "scale depth");
    return {model::CoshDuct{c0, axis, scale}, domain};
}

SoundSpeedProfile SoundSpeedProfile::sinh_profile(double c0, double axis, double scale, DepthInterval domain) {
    require_positive(c0, "c0");
    require_finite(axis, "axis depth");
    require_positive(scale, "scale depth");
    return {model::Sinh{c0, axis, scale}, domain};
}

SoundSpeedProfile SoundSpeedProfile::cos_profile(double c0, double axis, double scale, DepthInterval domain) {
    require_positive(c0, "c0");
    require_finite(axis, "axis depth");
    require_positive(scale, "scale depth");
    return {model::Cos{c0, axis, scale}, domain};
}

SoundSpeedProfile SoundSpeedProfile::sin_profile(double c0, double axis, double scale, DepthInterval domain) {
    require_positive(c0, "c0");
    require_finite(axis, "axis depth");
    require_positive(scale, "scale depth");
    return {model::Sin{c0, axis, scale}, domain};
}

SoundSpeedProfile SoundSpeedProfile::tabulated(std::vector<double> depths, std::vector<double> speeds) {
    for (double c : speeds) require_positive(c, "tabulated speed");
    return {model::Tabulated{CubicSpline(depths, speeds)}, {}};
}

SoundSpeedProfile SoundSpeedProfile::from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open profile CSV " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::InvalidProfile, "profile CSV is empty");

    std::vector<double> depth, speed, rho;
    std::size_t columns = 0;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                fields.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidProfile,
                            path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (columns == 0) columns = fields.size();
        if (fields.size() != columns || columns < 2 || columns > 3) {
            throw Error(ErrorCode::InvalidProfile,
                        path.string() + ":" + std::to_string(lineno) + ": expected 2 or 3 columns consistently");
        }
        depth.push_back(fields[0]);
        speed.push_back(fields[1]);
        if (columns == 3) rho.push_back(fields[2]);
    }
    auto profile = tabulated(depth, speed);
    if (columns == 3) profile = profile.with_density(Density(depth, rho));
    return profile;
}

SoundSpeedProfile SoundSpeedProfile::with_density(Density rho) const {
    SoundSpeedProfile out = *this;
    out.density_ = std::move(rho);
    return out;
}

SspEval SoundSpeedProfile::eval(double z) const {
    if (!domain_.contains(z)) {
        std::ostringstream msg;
        msg << "depth " << z << " m outside [" << domain_.lo << ", " << domain_.hi << "]";
        throw Error(ErrorCode::OutOfDomain, msg.str());
    }
    SspEval out = eval_model(model_, z);
    if (!(out.c > 0.0)) {
        std::ostringstream msg;
        msg << "c(" << z << ") = " << out.c;
        throw Error(ErrorCode::NonPositiveSpeed, msg.str());
    }
    if (density_) {
        const Jet r = density_->eval(z);
        out.rho = r.value;
        out.drho = r.d1;
    }
    return out;
}

double SoundSpeedProfile::curvature(double z) const {
    const SspEval e = eval(z);
    return e.c * e.d2c - e.dc * e.dc;
}

std::optional<double> SoundSpeedProfile::constant_curvature() const {
    return std::visit(
        Overloaded{
            [](const model::Constant&) -> std::optional<double> { return 0.0; },
            [](const model::Linear& p) -> std::optional<double> { return -p.gradient * p.gradient; },
            [](const model::Munk&) -> std::optional<double> { return std::nullopt; },
            [](const model::CoshDuct& p) -> std::optional<double> { return p.c0 * p.c0 / (p.scale * p.scale); },
            [](const model::Sinh& p) -> std::optional<double> { return -p.c0 * p.c0 / (p.scale * p.scale); },
            [](const model::Cos& p) -> std::optional<double> { return -p.c0 * p.c0 / (p.scale * p.scale); },
            [](const model::Sin& p) -> std::optional<double> { return -p.c0 * p.c0 / (p.scale * p.scale); },
            [](const model::Tabulated&) -> std::optional<double> { return std::nullopt; },
        },
        model_);
}

std::string SoundSpeedProfile::name() const {
    return std::visit(Overloaded{
                          [](const model::Constant&) { return std::string("constant"); },
                          [](const model::Linear&) { return std::string("linear"); },
                          [](const model::Munk&) { return std::string("munk"); },
                          [](const model::CoshDuct&) { return std::string("cosh"); },
                          [](const model::Sinh&) { return std::string("sinh"); },
                          [](const model::Cos&) { return std::string("cos"); },
                          [](const model::Sin&) { return std::string("sin"); },
                          [](const model::Tabulated&) { return std::string("tabulated"); },
                      },
                      model_);
}

CzDistance cz_distance(const SoundSpeedProfile& profile, double z) {
    const SspEval e = profile.eval(z);
    const double k = e.c * e.d2c - e.dc * e.dc;
    if (!(k > 0.0)) {
        std::ostringstream msg;
        msg << "K(" << z << ") = " << k << " s^-2; divergence zone has no caustic spacing";
        throw Error(ErrorCode::NonPositiveCurvature, msg.str());
    }
    CzDistance out{std::numbers::pi * e.c / std::sqrt(k), std::nullopt, std::nullopt};
    if (e.d2c > 0.0) out.crude = std::numbers::pi * std::sqrt(e.c / e.d2c);
    if (const auto* duct = std::get_if<model::CoshDuct>(&profile.model())) out.exact = std::numbers::pi * duct->scale;
    return out;
}

CurvatureClass classify(const SoundSpeedProfile& profile, double z, double flat_tolerance) {
    const double k = profile.curvature(z);
    if (std::abs(k) < flat_tolerance) return CurvatureClass::Flat;
    return k > 0.0 ? CurvatureClass::ConvergentDuct : CurvatureClass::DivergenceZone;
}

std::string to_string(CurvatureClass c) {
    switch (c) {
        case CurvatureClass::ConvergentDuct: return "convergent-duct";
        case CurvatureClass::DivergenceZone: return "divergence-zone";
        case CurvatureClass::Flat: return "flat";
    }
    return "unknown";
}

}  // namespace gbeam
