#pragma once

// Intertwining (Darboux) transformation of the constant-drive two-level
// system. Starting from f0 = const, a transformation with eigenvalue
// lambda = iR produces the new drive f1 = f0 + delta_f, where delta_f and the
// diagonal matrix W of L = d/dt - W are rational in q(t). q solves
//
//   dq/dt + 2 R q - f0 (1 + q^2) = 0
//
// and is built from a solution psi of psi'' + varpi^2 psi = 0,
// varpi^2 = f0^2 - R^2. q blows up at the zeros of psi while delta_f and W do
// not, so q is carried as a homogeneous pair (N, D), q = N / D.

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "rabi_darboux/errors.hpp"
#include "rabi_darboux/twolevel.hpp"

namespace rabi_darboux {

struct SeedParams {
    double f0 = 1.0;
    double varpi = 0.0;
    // Phase of psi for varpi > 0.
    double a = 0.0;
    // psi = (A / varpi) sin(varpi t + a + b) for varpi > 0, psi = A t + B for varpi = 0.
    double amplitude = 1.0;
    double offset = 0.5;
    // R; derived from (f0, varpi) when absent, checked against them when given.
    std::optional<double> radius;
};

class TransformSeed {
public:
    explicit TransformSeed(const SeedParams& p)
        : f0_(p.f0), varpi_(p.varpi), a_(p.a), amplitude_(p.amplitude), offset_(p.offset) {
        detail::require(std::isfinite(f0_) && std::isfinite(varpi_) && std::isfinite(a_) &&
                            std::isfinite(amplitude_) && std::isfinite(offset_),
                        "seed: parameters must be finite");
        detail::require(f0_ > 0.0, "seed: f0 must be positive");
        detail::require(varpi_ >= 0.0 && varpi_ < f0_, "seed: requires 0 <= varpi < f0 (R > 0)");
        radius_ = drive_law::radius(f0_, varpi_);
        if (p.radius) {
            const double r = *p.radius;
            detail::require(std::isfinite(r) && r > 0.0, "seed: R must be positive");
            detail::require(std::abs(r * r + varpi_ * varpi_ - f0_ * f0_) <= 1e-12 * f0_ * f0_,
                            "seed: varpi^2 + R^2 must equal f0^2");
            radius_ = r;
        }
        detail::require(amplitude_ != 0.0, "seed: amplitude A must be nonzero");
        if (varpi_ == 0.0) {
            detail::require(std::abs(amplitude_ - 2.0 * offset_ * f0_) <=
                                1e-12 * std::max(std::abs(amplitude_), std::abs(2.0 * offset_ * f0_)),
                            "seed: varpi = 0 requires A = 2 B f0");
            b_ = 0.0;
        } else {
            b_ = 0.5 * std::atan2(varpi_, radius_);
        }
    }

    // psi = A t + B with A = 2 B f0: the non-oscillating family.
    static TransformSeed monotone(double f0, double offset = 1.0) {
        return TransformSeed(SeedParams{.f0 = f0, .varpi = 0.0, .a = 0.0, .amplitude = 2.0 * offset * f0,
                                        .offset = offset, .radius = std::nullopt});
    }

    static TransformSeed oscillatory(double f0, double varpi, double a, double amplitude = 1.0) {
        detail::require(varpi > 0.0, "seed: oscillatory family needs varpi > 0");
        return TransformSeed(SeedParams{.f0 = f0, .varpi = varpi, .a = a, .amplitude = amplitude, .offset = 0.0, .radius = std::nullopt});
    }

    // Only a purely imaginary eigenvalue lambda = iR yields a real drive.
    static TransformSeed from_eigenvalue(double f0, cplx lambda, double a = 0.0, double amplitude = 1.0) {
        detail::require(lambda.real() == 0.0, "seed: transformation eigenvalue must be purely imaginary");
        const double r = lambda.imag();
        detail::require(r > 0.0 && r <= f0, "seed: need 0 < Im(lambda) <= f0");
        const double varpi = std::sqrt((f0 - r) * (f0 + r));
        if (varpi == 0.0) return monotone(f0, amplitude / (2.0 * f0));
        return TransformSeed(SeedParams{.f0 = f0, .varpi = varpi, .a = a, .amplitude = amplitude, .offset = 0.0, .radius = r});
    }

    double f0() const noexcept { return f0_; }
    double radius() const noexcept { return radius_; }
    double varpi() const noexcept { return varpi_; }
    double phase() const noexcept { return a_; }
    double amplitude() const noexcept { return amplitude_; }
    double offset() const noexcept { return offset_; }
    // b with sin 2b = varpi / f0, cos 2b = R / f0.
    double phase_shift() const noexcept { return b_; }
    cplx eigenvalue() const noexcept { return {0.0, radius_}; }

    // Drive law of the transformed system in its closed form (independent of
    // the (N, D) route); used to drive the numerical oracle.
    DriveProfile closed_form_drive() const {
        if (varpi_ == 0.0) return DriveProfile::monotone_limit(f0_);
        return DriveProfile::oscillatory(f0_, varpi_, a_);
    }

private:
    double f0_;
    double varpi_;
    double a_;
    double amplitude_;
    double offset_;
    double radius_ = 0.0;
    double b_ = 0.0;
};

struct PsiPair {
    double psi;
    double psidot;
};

inline PsiPair psi_pair(const TransformSeed& seed, double t) {
    const double w = seed.varpi();
    if (w == 0.0) return {seed.amplitude() * t + seed.offset(), seed.amplitude()};
    const double x = w * t + seed.phase() + seed.phase_shift();
    return {seed.amplitude() / w * std::sin(x), seed.amplitude() * std::cos(x)};
}

struct Homogeneous {
    double n;
    double d;
};

class QTrajectory {
public:
    explicit QTrajectory(TransformSeed seed) : seed_(std::move(seed)) {}

    // N = R psi - psi', D = f0 psi.
    Homogeneous operator()(double t) const {
        const auto [psi, psidot] = psi_pair(seed_, t);
        return {seed_.radius() * psi - psidot, seed_.f0() * psi};
    }

    // (dN/dt, dD/dt), using psi'' = -varpi^2 psi.
    Homogeneous derivative(double t) const {
        const auto [psi, psidot] = psi_pair(seed_, t);
        const double w2 = seed_.varpi() * seed_.varpi();
        return {seed_.radius() * psidot + w2 * psi, seed_.f0() * psidot};
    }

    // N / D; infinite at the zeros of psi.
    double value(double t) const {
        const auto [n, d] = (*this)(t);
        return n / d;
    }

    // Riccati residual q' + 2Rq - f0(1 + q^2) scaled by D^2 / (N^2 + D^2), which
    // keeps it bounded through the poles of q.
    double riccati_residual(double t) const {
        const auto [n, d] = (*this)(t);
        const auto [nd, dd] = derivative(t);
        const double r = seed_.radius();
        const double f0 = seed_.f0();
        return (nd * d - n * dd + 2.0 * r * n * d - f0 * (n * n + d * d)) / (n * n + d * d);
    }

    const TransformSeed& seed() const noexcept { return seed_; }

private:
    TransformSeed seed_;
};

inline QTrajectory q_trajectory(const TransformSeed& seed) { return QTrajectory(seed); }

// 4 R q / (1 + q^2) - 2 f0 in homogeneous form.
inline double delta_f(const TransformSeed& seed, const QTrajectory& q, double t) {
    const auto [n, d] = q(t);
    return 4.0 * seed.radius() * n * d / (n * n + d * d) - 2.0 * seed.f0();
}

inline double transformed_drive(const TransformSeed& seed, const QTrajectory& q, double t) {
    return seed.f0() + delta_f(seed, q, t);
}

inline double f1_monotone(double f0, double t) {
    detail::require(f0 != 0.0, "f1_monotone: f0 must be nonzero");
    return drive_law::monotone_limit(f0, t);
}

// Transformed drive for psi = A t + B with general (A, B).
inline double f1_general(double f0, double A, double B, double t) {
    detail::require(f0 != 0.0, "f1_general: f0 must be nonzero");
    detail::require(A != 0.0 || B != 0.0, "f1_general: (A, B) must not both vanish");
    const double den = 2.0 * A * A * f0 * f0 * t * t - 2.0 * A * f0 * (A - 2.0 * B * f0) * t + A * A -
                       2.0 * A * B * f0 + 2.0 * B * B * f0 * f0;
    if (den == 0.0) throw PoleError(t);
    return f0 - 2.0 * A * A * f0 / den;
}

// Phase a for which the oscillatory drive tends to f1_monotone as varpi -> 0.
inline double special_phase_a(double f0, double varpi) {
    detail::require(varpi > 0.0 && varpi < f0, "special_phase_a: requires 0 < varpi < f0");
    const double r = drive_law::radius(f0, varpi);
    return std::atan(varpi / (2.0 * f0)) - 0.5 * std::atan(varpi / r);
}

// u21 / u11 = (1 + i q)^2 / (1 + q^2) = (D + i N)^2 / (N^2 + D^2); unit modulus.
inline cplx spinor_ratio(const Homogeneous& h) {
    const cplx z{h.d, h.n};
    return z * z / (h.n * h.n + h.d * h.d);
}

// W = diag(w1, w2) with w2 = conj(w1).
class WMatrix {
public:
    explicit WMatrix(cplx w1) noexcept : w1_(w1) {}

    cplx w1() const noexcept { return w1_; }
    cplx w2() const noexcept { return std::conj(w1_); }

    SpinorState operator*(const SpinorState& s) const noexcept { return {w1_ * s.a1, w2() * s.a2}; }

private:
    cplx w1_;
};

inline WMatrix w_matrix(const TransformSeed& seed, const QTrajectory& q, double t) {
    return WMatrix(cplx{0.0, -seed.f0()} + seed.radius() * spinor_ratio(q(t)));
}

// L Psi = dPsi/dt - W Psi for Psi solving the constant-drive system at
// energy xi; dPsi/dt comes from the equations of motion, not differencing.
inline SpinorState apply_intertwiner(const TransformSeed& seed, double xi, const SpinorState& psi_state, double t) {
    const QTrajectory q(seed);
    return schrodinger_rhs(seed.f0(), xi, psi_state) - w_matrix(seed, q, t) * psi_state;
}

// Exact solution of the transformed system (drive f0 + delta_f) with the
// given value at grid.t0(). The two constant-drive basis solutions are
// transformed and combined through a 2x2 solve at the grid start.
inline StateTrace transformed_solution(const TransformSeed& seed, double xi, const SpinorState& initial,
                                       const TimeGrid& grid) {
    detail::require(std::isfinite(xi) && xi > 0.0, "transformed_solution: xi must be positive");
    detail::require(std::abs(initial.norm2() - 1.0) <= 1e-9, "transformed_solution: initial state must have norm 1");
    const double t0 = grid.t0();
    const double f0 = seed.f0();
    const SpinorState col_a = apply_intertwiner(seed, xi, {1.0, 0.0}, t0);
    const SpinorState col_b = apply_intertwiner(seed, xi, {0.0, 1.0}, t0);
    const cplx det = col_a.a1 * col_b.a2 - col_b.a1 * col_a.a2;
    const double scale = std::max(max_abs(col_a), max_abs(col_b));
    if (!(std::abs(det) > 1e-14 * scale * scale)) throw NumericError("transformed_solution: degenerate transformed pair");
    const cplx ca = (initial.a1 * col_b.a2 - col_b.a1 * initial.a2) / det;
    const cplx cb = (col_a.a1 * initial.a2 - initial.a1 * col_a.a2) / det;
    const SpinorState coeffs{ca, cb};

    const auto times = grid.samples();
    std::vector<SpinorState> states;
    states.reserve(times.size());
    for (double t : times) {
        const SpinorState psi = rabi_propagate(f0, xi, coeffs, t - t0);
        states.push_back(apply_intertwiner(seed, xi, psi, t));
    }
    return StateTrace(times, std::move(states), "state");
}

// Excited-state probability for the varpi = 0 family starting in the
// ground state; reduces to 3 f0^2 t^2 / (1 + 4 f0^2 t^2) when xi^2 = 3 f0^2.
inline double p1_closed_form(double xi, double f0, double t) {
    detail::require(t >= 0.0, "p1_closed_form: t must be nonnegative");
    const double f2 = f0 * f0;
    const double om2 = f2 + xi * xi;
    const double om = std::sqrt(om2);
    const double d = xi * xi - 3.0 * f2;
    const double c = std::cos(om * t);
    const double s = std::sin(om * t);
    const double bracket = 16.0 * f2 * f2 * om2 * t * t * c * c + 4.0 * f2 * om * t * d * std::sin(2.0 * om * t) +
                           (4.0 * f2 * om2 * om2 * t * t + d * d) * s * s;
    return xi * xi / (om2 * om2 * om2 * (1.0 + 4.0 * f2 * t * t)) * bracket;
}

} // namespace rabi_darboux
