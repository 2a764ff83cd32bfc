#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "rabi_darboux/errors.hpp"
#include "rabi_darboux/twolevel.hpp"

namespace rabi_darboux {

// Dormand-Prince 5(4) tableau, FSAL.
namespace dopri5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace dopri5

struct IntegratorStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Adaptive integration of dPsi/dt = rhs(t, Psi) sampled at `times`.
// Steps are shortened to land exactly on each sample time, so no
// interpolation error enters the samples. The error norm is the RMS of
// |err_i| / (tol (1 + max(|y_i|, |y_new_i|))).
template <typename Rhs>
std::vector<SpinorState> integrate_dopri5(Rhs&& rhs, const SpinorState& initial, std::span<const double> times,
                                          double tol, IntegratorStats* stats = nullptr) {
    using namespace dopri5;
    std::vector<SpinorState> out;
    out.reserve(times.size());
    if (times.empty()) return out;
    out.push_back(initial);
    if (times.size() == 1) return out;

    constexpr std::size_t max_steps = 50'000'000;
    const double eps = std::numeric_limits<double>::epsilon();
    double t = times.front();
    SpinorState y = initial;
    SpinorState k1 = rhs(t, y);
    double h = std::min(times[1] - times[0], 0.1 * std::pow(tol, 0.2));
    std::size_t steps = 0;

    const auto scaled = [tol](cplx e, cplx y0, cplx y1) {
        const double sc = tol * (1.0 + std::max(std::abs(y0), std::abs(y1)));
        return std::norm(e) / (sc * sc);
    };

    for (std::size_t next = 1; next < times.size(); ++next) {
        const double target = times[next];
        while (t < target) {
            if (++steps > max_steps) throw NumericError("integrator: step budget exhausted at t = " + std::to_string(t));
            if (h < 16.0 * eps * std::max(1.0, std::abs(t))) throw StepUnderflowError(t);
            const bool lands = t + h >= target;
            const double step = lands ? target - t : h;

            const SpinorState k2 = rhs(t + c2 * step, y + (step * a21) * k1);
            const SpinorState k3 = rhs(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
            const SpinorState k4 = rhs(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
            const SpinorState k5 =
                rhs(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const SpinorState k6 =
                rhs(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const SpinorState y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double t_new = lands ? target : t + step;
            const SpinorState k7 = rhs(t_new, y_new);
            const SpinorState err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double err_norm =
                std::sqrt(0.5 * (scaled(err.a1, y.a1, y_new.a1) + scaled(err.a2, y.a2, y_new.a2)));
            if (!std::isfinite(err_norm)) throw NumericError("integrator: non-finite state at t = " + std::to_string(t));

            const double factor =
                err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
            if (err_norm <= 1.0) {
                t = t_new;
                y = y_new;
                k1 = k7;
                // A step clipped to hit a sample says nothing about the natural step size.
                if (!lands || step >= h) h = step * factor;
                if (stats) ++stats->accepted;
            } else {
                h = step * std::min(1.0, factor);
                if (stats) ++stats->rejected;
            }
        }
        out.push_back(y);
    }
    return out;
}

// Numerical solution of the two-level equations under params.drive, sampled
// on the grid.
inline StateTrace evolve(const DriveParams& params, const SpinorState& initial, const TimeGrid& grid, double tol,
                         IntegratorStats* stats = nullptr) {
    detail::require(initial.norm2() > 0.0 && std::isfinite(initial.norm2()), "evolve: initial state has zero norm");
    detail::require(tol >= 1e-13 && tol <= 1e-3, "evolve: tol must lie in [1e-13, 1e-3]");
    const auto times = grid.samples();
    const double xi = params.xi;
    const DriveProfile& drive = params.drive;
    auto rhs = [&](double t, const SpinorState& s) { return schrodinger_rhs(drive(t), xi, s); };
    auto states = integrate_dopri5(rhs, initial, times, tol, stats);
    return StateTrace(times, std::move(states), "state");
}

} // namespace rabi_darboux
