#include "gbeam/spline.hpp"

#include <algorithm>
#include <cstddef>

#include "gbeam/error.hpp"

namespace gbeam {

CubicSpline::CubicSpline(std::span<const double> knots, std::span<const double> values)
    : x_(knots.begin(), knots.end()), y_(values.begin(), values.end()) {
    const std::size_t n = x_.size();
    if (n != y_.size()) {
        throw Error(ErrorCode::InvalidProfile, "spline knots and values differ in length");
    }
    if (n < 4) {
        throw Error(ErrorCode::InvalidProfile, "spline needs at least 4 knots");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw Error(ErrorCode::InvalidProfile, "spline knots must be strictly increasing");
        }
    }

    // Thomas algorithm on the interior second derivatives; M0 = M(n-1) = 0.
    m_.assign(n, 0.0);
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
        const double lower = x_[i + 1] - x_[i];  // h of row i, symmetric matrix
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m_[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t i = k - 1; i >= 1; --i) {
        m_[i] = (rhs[i - 1] - upper[i - 1] * m_[i + 1]) / diag[i - 1];
    }
}

Jet CubicSpline::eval(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(std::distance(x_.begin(), it));
    i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;

    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h;
    const double b = (x - x_[i]) / h;
    const double m0 = m_[i];
    const double m1 = m_[i + 1];

    Jet out;
    out.value = a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
    out.d1 = (y_[i + 1] - y_[i]) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1;
    out.d2 = a * m0 + b * m1;
    return out;
}

}  // namespace gbeam
