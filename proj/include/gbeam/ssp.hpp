#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gbeam/spline.hpp"

namespace gbeam {

/// Closed depth interval [lo, hi] in metres; either end may be infinite.
struct DepthInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double z) const { return z >= lo && z <= hi; }
    DepthInterval intersect(const DepthInterval& o) const;
};

namespace model {

struct Constant {
    double c0;
};

/// c(z) = c0 + gradient * z
struct Linear {
    double c0;
    double gradient;  // [1/s]
};

/// c(z) = c0 (1 + eps (zb + exp(-zb) - 1)),  zb = (z - axis) / scale
struct Munk {
    double c0;
    double epsilon;
    double axis;
    double scale;
};

struct CoshDuct {
    double c0;
    double axis;
    double scale;
};

struct Sinh {
    double c0;
    double axis;
    double scale;
};

struct Cos {
    double c0;
    double axis;
    double scale;
};

struct Sin {
    double c0;
    double axis;
    double scale;
};

struct Tabulated {
    CubicSpline speed;
};

}  // namespace model

using ProfileModel = std::variant<model::Constant, model::Linear, model::Munk, model::CoshDuct,
                                  model::Sinh, model::Cos, model::Sin, model::Tabulated>;

/// Depth-dependent density, either uniform or interpolated from samples.
class Density {
public:
    explicit Density(double rho);
    Density(std::vector<double> depths, std::vector<double> rho);

    Jet eval(double z) const;

private:
    std::variant<double, CubicSpline> rep_;
};

/// Speed and its depth derivatives at one point, plus density when the profile has one.
struct SspEval {
    double c = 0.0;    // [m/s]
    double dc = 0.0;   // [1/s]
    double d2c = 0.0;  // [1/(m s)]
    std::optional<double> rho;
    std::optional<double> drho;
};

/// A horizontally stratified sound-speed profile c(z) with exact derivatives.
///
/// Depth z points down. Every closed-form variant carries hand-derived first
/// and second derivatives; tabulated profiles go through a natural cubic
/// spline so that c'' (and therefore the curvature) is continuous.
///
/// The valid interval is the user interval intersected with the region where
/// the closed form is positive. Evaluation outside it throws OutOfDomain, and
/// any point where c <= 0 throws NonPositiveSpeed.
class SoundSpeedProfile {
public:
    static SoundSpeedProfile constant(double c0, DepthInterval domain = {});
    static SoundSpeedProfile linear(double c0, double gradient, DepthInterval domain = {});
    static SoundSpeedProfile munk(double c0, double epsilon, double axis, double scale,
                                  DepthInterval domain = {});
    static SoundSpeedProfile cosh_duct(double c0, double axis, double scale, DepthInterval domain = {});
    static SoundSpeedProfile sinh_profile(double c0, double axis, double scale, DepthInterval domain = {});
    static SoundSpeedProfile cos_profile(double c0, double axis, double scale, DepthInterval domain = {});
    static SoundSpeedProfile sin_profile(double c0, double axis, double scale, DepthInterval domain = {});
    static SoundSpeedProfile tabulated(std::vector<double> depths, std::vector<double> speeds);

    /// Loads `depth_m,speed_mps[,density]` with a mandatory header row.
    static SoundSpeedProfile from_csv(const std::filesystem::path& path);

    SoundSpeedProfile with_density(Density rho) const;

    SspEval eval(double z) const;
    /// Acoustic Gaussian curvature K = c c'' - c'^2 of the Fermat metric [1/s^2].
    double curvature(double z) const;

    const DepthInterval& domain() const { return domain_; }
    const ProfileModel& model() const { return model_; }
    bool has_density() const { return density_.has_value(); }

    /// K for the constant-curvature model spaces (constant, linear, cosh, sinh,
    /// cos, sin); empty otherwise.
    std::optional<double> constant_curvature() const;

    std::string name() const;

private:
    SoundSpeedProfile(ProfileModel m, DepthInterval domain);

    ProfileModel model_;
    DepthInterval domain_;
    std::optional<Density> density_;
};

struct CzDistance {
    double half_wavelength;       // pi c K^{-1/2} with the local c  [m]
    std::optional<double> crude;  // pi (c / c'')^{1/2}, when c'' > 0
    std::optional<double> exact;  // cosh duct only: pi c0 K^{-1/2} = pi W, the same for every ray
};

/// Caustic spacing predicted from the local curvature. Throws
/// NonPositiveCurvature when K <= 0.
CzDistance cz_distance(const SoundSpeedProfile& profile, double z);

enum class CurvatureClass { ConvergentDuct, DivergenceZone, Flat };

inline constexpr double kDefaultFlatTolerance = 1e-12;  // [1/s^2]

CurvatureClass classify(const SoundSpeedProfile& profile, double z,
                        double flat_tolerance = kDefaultFlatTolerance);

std::string to_string(CurvatureClass c);

}  // namespace gbeam
