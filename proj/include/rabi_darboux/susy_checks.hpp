#pragma once

// Residual checks of the intertwining structure on explicit solutions.
//
// Notation: the equations of motion read h Psi = xi Psi with
// h = gamma d/dt + V, gamma = i sigma_x, V = i f sigma_y, and J = sigma_x
// realises the pseudo-adjoint h^+ = J h J. With W = diag(w1, conj(w1)) the
// backward operator reduces to
//
//   J L^+ J = J (-d/dt - W^+) J = -d/dt - sigma_x diag(w2, w1) sigma_x
//           = -d/dt - W,
//
// and the factorisation J L^+ J L = h0^2 - lambda^2 becomes, on a solution
// Psi at energy xi with lambda = iR,
//
//   -(L Psi)' - W (L Psi) = (xi^2 + R^2) Psi.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "rabi_darboux/darboux.hpp"
#include "rabi_darboux/twolevel.hpp"

namespace rabi_darboux {

struct ResidualReport {
    double max_abs = 0.0;
    double at_time = 0.0;
    std::string grid;
    std::string identity;
};

// Fault injection for detector self-tests. Defaults leave the identities intact.
struct CheckOptions {
    cplx w1_shift{};
    std::optional<double> factorization_constant;
};

namespace detail {

inline std::string describe(const TimeGrid& g) {
    std::ostringstream os;
    os.precision(17);
    os << "[" << g.t0() << ", " << g.t1() << "] n=" << g.size();
    return os.str();
}

// gamma v = i sigma_x v
inline SpinorState gamma_times(const SpinorState& v) noexcept { return {I * v.a2, I * v.a1}; }

// (i f sigma_y) v
inline SpinorState drive_potential_times(double f, const SpinorState& v) noexcept { return {f * v.a2, -f * v.a1}; }

// Everything the identities need at one instant, for one constant-drive
// solution Psi at energy xi.
struct IntertwinedPoint {
    SpinorState psi;
    SpinorState phi;
    SpinorState phi_dot;
    WMatrix w{cplx{}};
    double f1 = 0.0;
};

inline IntertwinedPoint intertwined_point(const TransformSeed& seed, const QTrajectory& q, double xi,
                                          const SpinorState& psi, double t, const CheckOptions& opt) {
    const double f0 = seed.f0();
    const double r = seed.radius();
    const Homogeneous h = q(t);
    const cplx ratio = spinor_ratio(h);
    const WMatrix w(cplx{0.0, -f0} + r * ratio + opt.w1_shift);

    // w1' = R ratio', ratio = exp(i theta), theta' = 2 f0 - 2 R sin(theta) from the Riccati equation.
    const double sin_theta = 2.0 * h.n * h.d / (h.n * h.n + h.d * h.d);
    const cplx w1_dot = r * I * (2.0 * f0 - 2.0 * r * sin_theta) * ratio;
    const WMatrix w_dot(w1_dot);

    const SpinorState psi_dot = schrodinger_rhs(f0, xi, psi);
    const SpinorState psi_ddot = schrodinger_rhs(f0, xi, psi_dot);
    IntertwinedPoint p;
    p.psi = psi;
    p.phi = psi_dot - w * psi;
    p.phi_dot = psi_ddot - w_dot * psi - w * psi_dot;
    p.w = w;
    p.f1 = f0 + delta_f(seed, q, t);
    return p;
}

template <typename PointResidual>
ResidualReport scan_basis(const TransformSeed& seed, double xi, const TimeGrid& grid, std::string identity,
                          PointResidual&& residual) {
    require(std::isfinite(xi) && xi > 0.0, "residual check: xi must be positive");
    const QTrajectory q(seed);
    ResidualReport report{0.0, grid.t0(), describe(grid), std::move(identity)};
    const SpinorState basis[] = {{1.0, 0.0}, {0.0, 1.0}};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        for (const auto& b : basis) {
            const SpinorState psi = rabi_propagate(seed.f0(), xi, b, t - grid.t0());
            const double value = residual(q, psi, t);
            if (!(value <= report.max_abs)) {
                report.max_abs = value;
                report.at_time = t;
            }
        }
    }
    return report;
}

} // namespace detail

// || gamma Phi' + V1 Phi - xi Phi || with Phi = L Psi and V1 = i f1 sigma_y.
inline ResidualReport intertwining_residual(const TransformSeed& seed, double xi, const TimeGrid& grid,
                                            const CheckOptions& opt = {}) {
    return detail::scan_basis(seed, xi, grid, "intertwining", [&](const QTrajectory& q, const SpinorState& psi, double t) {
        const auto p = detail::intertwined_point(seed, q, xi, psi, t, opt);
        const SpinorState res =
            detail::gamma_times(p.phi_dot) + detail::drive_potential_times(p.f1, p.phi) - xi * p.phi;
        return euclidean_norm(res);
    });
}

// || (-d/dt - W) L Psi - (xi^2 + R^2) Psi ||
inline ResidualReport factorization_residual(const TransformSeed& seed, double xi, const TimeGrid& grid,
                                             const CheckOptions& opt = {}) {
    const double r = seed.radius();
    const double constant = opt.factorization_constant.value_or(xi * xi + r * r);
    return detail::scan_basis(seed, xi, grid, "factorization", [&](const QTrajectory& q, const SpinorState& psi, double t) {
        const auto p = detail::intertwined_point(seed, q, xi, psi, t, opt);
        const SpinorState back = -1.0 * p.phi_dot - p.w * p.phi;
        return euclidean_norm(back - constant * p.psi);
    });
}

// Checks J V J = V^+ for V0 = i f0 sigma_y and for V1 = V0 + gamma W - W gamma,
// with w2 = i f0 + R u11/u21 computed on its own rather than as conj(w1).
// Also checks that V1 keeps the form i f1 sigma_y with f1 = f0 + delta_f.
inline ResidualReport pseudo_adjoint_consistency(const TransformSeed& seed, double xi, const TimeGrid& grid) {
    detail::require(std::isfinite(xi) && xi > 0.0, "residual check: xi must be positive");
    const QTrajectory q(seed);
    const double f0 = seed.f0();
    const double r = seed.radius();
    ResidualReport report{0.0, grid.t0(), detail::describe(grid), "pseudo-adjoint"};

    // V = [[0, p], [s, 0]]: J V J = [[0, s], [p, 0]], V^+ = [[0, conj s], [conj p, 0]].
    const auto deviation = [](cplx p, cplx s) {
        return std::max(std::abs(s - std::conj(s)), std::abs(p - std::conj(p)));
    };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const Homogeneous h = q(t);
        const cplx z{h.d, h.n};
        const cplx w1 = cplx{0.0, -f0} + r * z * z / (h.n * h.n + h.d * h.d);
        const cplx w2 = cplx{0.0, f0} + r * (h.n * h.n + h.d * h.d) / (z * z);
        const cplx p1 = f0 + I * (w2 - w1);
        const cplx s1 = -f0 + I * (w1 - w2);
        const double f1 = f0 + delta_f(seed, q, t);
        const double dev = std::max({deviation(cplx{f0}, cplx{-f0}), deviation(p1, s1), std::abs(p1 + s1),
                                     std::abs(p1 - f1)});
        if (!(dev <= report.max_abs)) {
            report.max_abs = dev;
            report.at_time = t;
        }
    }
    return report;
}

} // namespace rabi_darboux
