#pragma once

// Two-level system in the rotating wave approximation:
//
//   i dA1/dt - f A1 = xi A2
//   i dA2/dt + f A2 = xi A1
//
// with a real, possibly time-dependent detuning term f(t) and coupling xi
// (half the Rabi frequency). Reduced units throughout: f and xi in rad/time.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rabi_darboux/errors.hpp"
#include "rabi_darboux/spline.hpp"

namespace rabi_darboux {

using cplx = std::complex<double>;

inline constexpr cplx I{0.0, 1.0};

struct SpinorState {
    cplx a1{};
    cplx a2{};

    double norm2() const noexcept { return std::norm(a1) + std::norm(a2); }

    SpinorState& operator+=(const SpinorState& o) noexcept {
        a1 += o.a1;
        a2 += o.a2;
        return *this;
    }
    SpinorState& operator-=(const SpinorState& o) noexcept {
        a1 -= o.a1;
        a2 -= o.a2;
        return *this;
    }
    SpinorState& operator*=(cplx s) noexcept {
        a1 *= s;
        a2 *= s;
        return *this;
    }
    friend SpinorState operator+(SpinorState l, const SpinorState& r) noexcept { return l += r; }
    friend SpinorState operator-(SpinorState l, const SpinorState& r) noexcept { return l -= r; }
    friend SpinorState operator*(cplx s, SpinorState v) noexcept { return v *= s; }
    friend SpinorState operator*(double s, SpinorState v) noexcept { return v *= cplx{s, 0.0}; }
};

// Largest componentwise modulus; used for residual reports.
inline double max_abs(const SpinorState& s) noexcept { return std::max(std::abs(s.a1), std::abs(s.a2)); }

inline double euclidean_norm(const SpinorState& s) noexcept { return std::sqrt(s.norm2()); }

// ---------------------------------------------------------------------------
// Drive laws f(t)

namespace drive_law {

inline double monotone_limit(double f0, double t) noexcept {
    return f0 - 4.0 * f0 / (1.0 + 4.0 * f0 * f0 * t * t);
}

// sqrt(f0^2 - varpi^2) without cancellation when varpi is close to f0.
inline double radius(double f0, double varpi) noexcept { return std::sqrt((f0 - varpi) * (f0 + varpi)); }

inline double oscillatory(double f0, double varpi, double a, double t) noexcept {
    const double r = radius(f0, varpi);
    return f0 + 2.0 * varpi * varpi / (r * std::cos(2.0 * varpi * t + 2.0 * a) - f0);
}

} // namespace drive_law

struct ConstantDrive {
    double f0;
};

// f0 - 4 f0 / (1 + 4 f0^2 t^2): the fixed-excitation drive.
struct MonotoneLimitDrive {
    double f0;
};

// f0 + 2 varpi^2 / (R cos(2 varpi t + 2a) - f0), R = sqrt(f0^2 - varpi^2).
struct OscillatoryDrive {
    double f0;
    double varpi;
    double a;
};

struct TabulatedDrive {
    CubicSpline spline;
};

class DriveProfile {
public:
    using Law = std::variant<ConstantDrive, MonotoneLimitDrive, OscillatoryDrive, TabulatedDrive>;

    static DriveProfile constant(double f0) {
        detail::require(std::isfinite(f0), "constant drive: f0 must be finite");
        return DriveProfile(ConstantDrive{f0});
    }

    static DriveProfile monotone_limit(double f0) {
        detail::require(std::isfinite(f0) && f0 != 0.0, "monotone drive: f0 must be finite and nonzero");
        return DriveProfile(MonotoneLimitDrive{f0});
    }

    static DriveProfile oscillatory(double f0, double varpi, double a) {
        detail::require(std::isfinite(f0) && std::isfinite(varpi) && std::isfinite(a),
                        "oscillatory drive: parameters must be finite");
        detail::require(varpi > 0.0 && varpi < f0, "oscillatory drive: requires 0 < varpi < f0");
        return DriveProfile(OscillatoryDrive{f0, varpi, a});
    }

    static DriveProfile tabulated(std::vector<double> times, std::vector<double> values) {
        detail::require(times.size() == values.size(), "tabulated drive: times and values differ in length");
        detail::require(times.size() >= 2, "tabulated drive: need at least two samples");
        return DriveProfile(TabulatedDrive{CubicSpline(std::move(times), std::move(values))});
    }

    double operator()(double t) const {
        return std::visit(
            [t](const auto& law) -> double {
                using L = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<L, ConstantDrive>) {
                    return law.f0;
                } else if constexpr (std::is_same_v<L, MonotoneLimitDrive>) {
                    return drive_law::monotone_limit(law.f0, t);
                } else if constexpr (std::is_same_v<L, OscillatoryDrive>) {
                    return drive_law::oscillatory(law.f0, law.varpi, law.a, t);
                } else {
                    return law.spline(t);
                }
            },
            law_);
    }

    std::string_view name() const noexcept {
        static constexpr std::string_view names[] = {"constant", "monotone", "oscillatory", "tabulated"};
        return names[law_.index()];
    }

    const Law& law() const noexcept { return law_; }

private:
    explicit DriveProfile(Law law) : law_(std::move(law)) {}
    Law law_;
};

struct DriveParams {
    double xi;
    DriveProfile drive;

    DriveParams(double coupling, DriveProfile profile) : xi(coupling), drive(std::move(profile)) {
        detail::require(std::isfinite(xi) && xi > 0.0, "coupling xi must be positive");
    }
};

// ---------------------------------------------------------------------------
// Sampling

class TimeGrid {
public:
    TimeGrid(double t0, double t1, std::size_t n) : t0_(t0), t1_(t1), n_(n) {
        detail::require(std::isfinite(t0) && std::isfinite(t1) && t1 > t0, "time grid: need t1 > t0");
        detail::require(n >= 2, "time grid: need at least two samples");
    }

    double t0() const noexcept { return t0_; }
    double t1() const noexcept { return t1_; }
    std::size_t size() const noexcept { return n_; }
    double step() const noexcept { return (t1_ - t0_) / static_cast<double>(n_ - 1); }

    double operator[](std::size_t i) const noexcept {
        if (i + 1 == n_) return t1_;
        return t0_ + (t1_ - t0_) * (static_cast<double>(i) / static_cast<double>(n_ - 1));
    }

    std::vector<double> samples() const {
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
        return out;
    }

private:
    double t0_;
    double t1_;
    std::size_t n_;
};

template <typename T>
class Trace {
public:
    Trace(std::vector<double> times, std::vector<T> values, std::string kind)
        : times_(std::move(times)), values_(std::move(values)), kind_(std::move(kind)) {
        detail::require(times_.size() == values_.size(), "trace: times and values differ in length");
        for (std::size_t i = 1; i < times_.size(); ++i)
            detail::require(times_[i] > times_[i - 1], "trace: times must be strictly increasing");
    }

    std::span<const double> times() const noexcept { return times_; }
    std::span<const T> values() const noexcept { return values_; }
    const std::string& kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return times_.size(); }
    bool empty() const noexcept { return times_.empty(); }

private:
    std::vector<double> times_;
    std::vector<T> values_;
    std::string kind_;
};

using StateTrace = Trace<SpinorState>;
using ScalarTrace = Trace<double>;

// ---------------------------------------------------------------------------
// Operations

// Time derivative of the amplitudes for drive value f and coupling xi.
inline SpinorState schrodinger_rhs(double f, double xi, const SpinorState& s) noexcept {
    return {-I * (f * s.a1 + xi * s.a2), I * (f * s.a2 - xi * s.a1)};
}

// Excited-state probability for constant f0, starting in the ground state.
inline double rabi_probability(double xi, double f0, double t) {
    detail::require(t >= 0.0, "rabi_probability: t must be nonnegative");
    const double omega2 = f0 * f0 + xi * xi;
    if (omega2 == 0.0) return 0.0;
    const double s = std::sin(std::sqrt(omega2) * t);
    // xi^2/(2 Omega^2) (1 - cos 2 Omega t), written without the cancellation.
    return xi * xi / omega2 * s * s;
}

// Exact constant-drive propagation over an interval tau. The generator M of
// dPsi/dt = M Psi squares to -(f0^2 + xi^2), so exp(M tau) = cos + M sin / Omega.
inline SpinorState rabi_propagate(double f0, double xi, const SpinorState& s, double tau) noexcept {
    const double omega = std::hypot(f0, xi);
    const double c = std::cos(omega * tau);
    const double sinc = omega == 0.0 ? tau : std::sin(omega * tau) / omega;
    const SpinorState m = schrodinger_rhs(f0, xi, s);
    return {c * s.a1 + sinc * m.a1, c * s.a2 + sinc * m.a2};
}

// |a2|^2 / (|a1|^2 + |a2|^2) pointwise.
inline ScalarTrace probability(const StateTrace& trace) {
    detail::require(!trace.empty(), "probability: empty trace");
    std::vector<double> p;
    p.reserve(trace.size());
    for (const auto& s : trace.values()) {
        const double n2 = s.norm2();
        if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericError("probability: zero-norm state in trace");
        p.push_back(std::norm(s.a2) / n2);
    }
    return ScalarTrace({trace.times().begin(), trace.times().end()}, std::move(p), "probability");
}

// max_t |norm2(t) - norm2(t0)|
inline double norm_drift(const StateTrace& trace) {
    if (trace.empty()) return 0.0;
    const double ref = trace.values().front().norm2();
    double worst = 0.0;
    for (const auto& s : trace.values()) worst = std::max(worst, std::abs(s.norm2() - ref));
    return worst;
}

} // namespace rabi_darboux
