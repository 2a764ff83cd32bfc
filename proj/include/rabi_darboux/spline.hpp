#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rabi_darboux/errors.hpp"

namespace rabi_darboux {

// Clamped cubic spline through (x_i, y_i). End slopes come from one-sided
// three-point differences (two-point when only two knots exist). Outside
// [x_front, x_back] the spline holds its end values.
class CubicSpline {
public:
    CubicSpline() = default;

    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        detail::require(x_.size() == y_.size(), "spline: knot and value counts differ");
        detail::require(x_.size() >= 2, "spline: need at least two knots");
        for (std::size_t i = 0; i < x_.size(); ++i) {
            detail::require(std::isfinite(x_[i]) && std::isfinite(y_[i]),
                            "spline: non-finite knot or value");
            if (i > 0) detail::require(x_[i] > x_[i - 1], "spline: knots must be strictly increasing");
        }
        solve_moments();
    }

    double operator()(double x) const {
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        const auto hi = static_cast<std::size_t>(
            std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        const std::size_t i = hi - 1;
        const double h = x_[hi] - x_[i];
        const double a = (x_[hi] - x) / h;
        const double b = (x - x_[i]) / h;
        return a * y_[i] + b * y_[hi] +
               ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
    }

    const std::vector<double>& knots() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return y_; }

private:
    double end_slope_front() const {
        const double h0 = x_[1] - x_[0];
        if (x_.size() == 2) return (y_[1] - y_[0]) / h0;
        const double h1 = x_[2] - x_[1];
        return -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * y_[0] + (h0 + h1) / (h0 * h1) * y_[1] -
               h0 / (h1 * (h0 + h1)) * y_[2];
    }

    double end_slope_back() const {
        const std::size_t n = x_.size();
        const double h0 = x_[n - 1] - x_[n - 2];
        if (n == 2) return (y_[n - 1] - y_[n - 2]) / h0;
        const double h1 = x_[n - 2] - x_[n - 3];
        return (2.0 * h0 + h1) / (h0 * (h0 + h1)) * y_[n - 1] - (h0 + h1) / (h0 * h1) * y_[n - 2] +
               h0 / (h1 * (h0 + h1)) * y_[n - 3];
    }

    // Second derivatives at the knots; tridiagonal solve (Thomas).
    void solve_moments() {
        const std::size_t n = x_.size();
        std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
        const double s0 = end_slope_front();
        const double s1 = end_slope_back();
        {
            const double h = x_[1] - x_[0];
            diag[0] = 2.0 * h;
            upper[0] = h;
            rhs[0] = 6.0 * ((y_[1] - y_[0]) / h - s0);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hl = x_[i] - x_[i - 1];
            const double hr = x_[i + 1] - x_[i];
            lower[i] = hl;
            diag[i] = 2.0 * (hl + hr);
            upper[i] = hr;
            rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
        }
        {
            const double h = x_[n - 1] - x_[n - 2];
            lower[n - 1] = h;
            diag[n - 1] = 2.0 * h;
            rhs[n - 1] = 6.0 * (s1 - (y_[n - 1] - y_[n - 2]) / h);
        }
        for (std::size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m_.assign(n, 0.0);
        m_[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

} // namespace rabi_darboux
