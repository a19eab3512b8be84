#pragma once

#include <span>
#include <vector>

namespace gbeam {

/// Value and first two derivatives of a scalar function of depth.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Natural cubic interpolating spline (zero second derivative at both ends).
/// C2 everywhere, so its second derivative is continuous and piecewise linear.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::span<const double> knots, std::span<const double> values);

    Jet eval(double x) const;

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace gbeam
