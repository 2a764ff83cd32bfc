#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "rabi_darboux/darboux.hpp"
#include "rabi_darboux/integrator.hpp"

namespace rd = rabi_darboux;
using rd::cplx;

namespace {

// Closed forms of q and delta_f for the oscillatory family, written in terms
// of the phase 2 varpi t + 2a only. Independent of the (N, D) route.
double q_closed(double f0, double varpi, double a, double t) {
    const double r = std::sqrt(f0 * f0 - varpi * varpi);
    const double x = 2.0 * varpi * t + 2.0 * a;
    return (r * std::cos(x) + varpi * std::sin(x) - f0) / (f0 * std::cos(x) - r);
}

double delta_f_closed(double f0, double varpi, double a, double t) {
    const double r = std::sqrt(f0 * f0 - varpi * varpi);
    return 2.0 * varpi * varpi / (r * std::cos(2.0 * varpi * t + 2.0 * a) - f0);
}

double monotone_p1(double f0, double t) { return 3.0 * f0 * f0 * t * t / (1.0 + 4.0 * f0 * f0 * t * t); }

struct SeedCase {
    double f0, varpi, a;
};

std::vector<SeedCase> random_cases(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uf0(0.1, 10.0), ur(1e-3, 1.0 - 1e-3), ua(-1.0, 1.0);
    std::vector<SeedCase> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double f0 = uf0(rng);
        out.push_back({f0, ur(rng) * f0, ua(rng)});
    }
    return out;
}

} // namespace

TEST(Seed, DerivesRadiusAndPhaseShift) {
    const auto s = rd::TransformSeed::oscillatory(1.0, 0.6, 0.0);
    EXPECT_NEAR(s.radius(), 0.8, 1e-15);
    EXPECT_NEAR(s.phase_shift(), 0.321750554396642193, 1e-15);
    EXPECT_NEAR(std::sin(2.0 * s.phase_shift()), 0.6, 1e-15);
    EXPECT_NEAR(std::cos(2.0 * s.phase_shift()), 0.8, 1e-15);
    EXPECT_EQ(s.eigenvalue(), cplx(0.0, s.radius()));
}

TEST(Seed, Invariants) {
    EXPECT_THROW(rd::TransformSeed::oscillatory(1.0, 1.0, 0.0), rd::ValidationError);
    EXPECT_THROW(rd::TransformSeed::oscillatory(0.0, 0.5, 0.0), rd::ValidationError);
    EXPECT_THROW(rd::TransformSeed::oscillatory(1.0, 0.5, 0.0, 0.0), rd::ValidationError);
    EXPECT_THROW(rd::TransformSeed(rd::SeedParams{.f0 = 1.0, .varpi = 0.6, .a = 0.0, .amplitude = 1.0, .offset = 0.0,
                                                  .radius = 0.7}),
                 rd::ValidationError);
    EXPECT_THROW(rd::TransformSeed(rd::SeedParams{.f0 = 1.0, .varpi = 0.0, .a = 0.0, .amplitude = 1.0, .offset = 1.0,
                                                  .radius = std::nullopt}),
                 rd::ValidationError);
    EXPECT_NO_THROW(rd::TransformSeed(rd::SeedParams{.f0 = 1.0, .varpi = 0.6, .a = 0.0, .amplitude = 1.0,
                                                     .offset = 0.0, .radius = 0.8}));
}

TEST(Seed, EigenvalueMustBeImaginary) {
    EXPECT_THROW(rd::TransformSeed::from_eigenvalue(1.0, cplx(0.1, 0.8)), rd::ValidationError);
    EXPECT_THROW(rd::TransformSeed::from_eigenvalue(1.0, cplx(0.0, -0.8)), rd::ValidationError);
    const auto s = rd::TransformSeed::from_eigenvalue(1.0, cplx(0.0, 0.8), 0.1);
    EXPECT_NEAR(s.varpi(), 0.6, 1e-15);
    const auto m = rd::TransformSeed::from_eigenvalue(2.0, cplx(0.0, 2.0), 0.0, 3.0);
    EXPECT_EQ(m.varpi(), 0.0);
    EXPECT_DOUBLE_EQ(m.offset(), 0.75);
}

TEST(PsiPair, LinearFamily) {
    const auto s = rd::TransformSeed::monotone(1.0, 1.0);
    const auto p = rd::psi_pair(s, 0.0);
    EXPECT_EQ(p.psi, 1.0);
    EXPECT_EQ(p.psidot, 2.0);
}

TEST(PsiPair, SolvesHarmonicEquation) {
    const auto s = rd::TransformSeed::oscillatory(1.3, 0.7, 0.2, 1.7);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 50.0);
    const double h = 1e-3;
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng);
        const double second =
            (rd::psi_pair(s, t + h).psi - 2.0 * rd::psi_pair(s, t).psi + rd::psi_pair(s, t - h).psi) / (h * h);
        EXPECT_NEAR(second + 0.49 * rd::psi_pair(s, t).psi, 0.0, 1e-6);
        const double first = (rd::psi_pair(s, t + h).psi - rd::psi_pair(s, t - h).psi) / (2.0 * h);
        EXPECT_NEAR(first, rd::psi_pair(s, t).psidot, 1e-6);
    }
}

TEST(QTrajectory, LinearFamily) {
    const auto s = rd::TransformSeed::monotone(1.0, 1.0);
    const auto q = rd::q_trajectory(s);
    EXPECT_DOUBLE_EQ(q.value(0.0), -1.0);
    EXPECT_NEAR(q.value(1e8), 1.0, 1e-7);
    for (double t = 0.0; t < 10.0; t += 0.37) EXPECT_NEAR(q.value(t), 1.0 - 2.0 / (2.0 * t + 1.0), 1e-14);
}

TEST(QTrajectory, MatchesClosedFormAtRandomTimes) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(0.0, 100.0);
    for (const auto& c : random_cases(20, 3)) {
        const auto s = rd::TransformSeed::oscillatory(c.f0, c.varpi, c.a);
        const auto q = rd::q_trajectory(s);
        for (int i = 0; i < 100; ++i) {
            const double t = ut(rng);
            const double expected = q_closed(c.f0, c.varpi, c.a, t);
            const double got = q.value(t);
            // Compare on the projective circle: q / sqrt(1 + q^2) is well conditioned near poles.
            const auto proj = [](double x) { return std::isinf(x) ? std::copysign(1.0, x) : x / std::hypot(1.0, x); };
            if (std::abs(expected) < 1e6) {
                EXPECT_NEAR(proj(got), proj(expected), 1e-10) << "t=" << t;
            }
        }
    }
}

TEST(QTrajectory, RiccatiResidualVanishes) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ut(0.0, 200.0);
    auto cases = random_cases(10, 9);
    for (const auto& c : cases) {
        const auto q = rd::q_trajectory(rd::TransformSeed::oscillatory(c.f0, c.varpi, c.a, 0.3));
        for (int i = 0; i < 1000; ++i) EXPECT_LE(std::abs(q.riccati_residual(ut(rng))), 1e-10 * c.f0);
    }
    const auto m = rd::q_trajectory(rd::TransformSeed::monotone(2.5, 0.4));
    for (int i = 0; i < 1000; ++i) EXPECT_LE(std::abs(m.riccati_residual(ut(rng))), 1e-10 * 2.5);
}

TEST(DeltaF, Examples) {
    const auto m = rd::TransformSeed::monotone(1.0);
    EXPECT_DOUBLE_EQ(rd::delta_f(m, rd::q_trajectory(m), 0.0), -4.0);

    const auto s = rd::TransformSeed::oscillatory(1.0, 0.25, 0.015);
    const auto q = rd::q_trajectory(s);
    // 30-digit evaluation of 2 varpi^2 / (R cos 2a - f0)
    EXPECT_NEAR(rd::delta_f(s, q, 0.0), -3.88321267126753198599605537139, 1e-10);

    // psi zero crossing: varpi t + a + b = pi
    const double tz = (std::numbers::pi - s.phase() - s.phase_shift()) / s.varpi();
    EXPECT_NEAR(rd::delta_f(s, q, tz), -2.0, 1e-12);
}

TEST(DeltaF, MatchesClosedFormAndIsBounded) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ut(0.0, 100.0);
    for (const auto& c : random_cases(30, 17)) {
        const auto s = rd::TransformSeed::oscillatory(c.f0, c.varpi, c.a, 2.0);
        const auto q = rd::q_trajectory(s);
        for (int i = 0; i < 100; ++i) {
            const double t = ut(rng);
            const double df = rd::delta_f(s, q, t);
            EXPECT_NEAR(df, delta_f_closed(c.f0, c.varpi, c.a, t), 1e-10 * std::max(1.0, std::abs(df)));
            EXPECT_GE(df, -2.0 * c.f0 - 2.0 * s.radius() - 1e-12 * c.f0);
            EXPECT_LE(df, -2.0 * c.f0 + 2.0 * s.radius() + 1e-12 * c.f0);
            EXPECT_NEAR(rd::transformed_drive(s, q, t), s.closed_form_drive()(t), 1e-10 * std::max(1.0, std::abs(df)));
        }
    }
}

TEST(F1, MonotoneExamples) {
    EXPECT_DOUBLE_EQ(rd::f1_monotone(1.0, 0.0), -3.0);
    EXPECT_DOUBLE_EQ(rd::f1_monotone(2.0, 0.0), -6.0);
    EXPECT_NEAR(rd::f1_monotone(1.0, 1e9), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(rd::f1_monotone(1.0, 1.0), 0.2);
    const auto m = rd::TransformSeed::monotone(1.0);
    EXPECT_NEAR(rd::transformed_drive(m, rd::q_trajectory(m), 1.0), 0.2, 1e-15);
    EXPECT_THROW(rd::f1_monotone(0.0, 1.0), rd::ValidationError);
}

TEST(F1, GeneralFamily) {
    for (double f0 : {0.3, 1.0, 2.0})
        for (double B : {0.5, 1.0, -2.0})
            for (double t = 0.0; t < 20.0; t += 0.7)
                EXPECT_NEAR(rd::f1_general(f0, 2.0 * B * f0, B, t), rd::f1_monotone(f0, t), 8.0 * 4.0 * f0 * 0x1p-52);
    EXPECT_EQ(rd::f1_general(1.0, 0.0, 1.0, 3.0), 1.0);
    EXPECT_DOUBLE_EQ(rd::f1_general(1.0, 1.0, 1.0, 0.0), -1.0);
    EXPECT_THROW(rd::f1_general(1.0, 0.0, 0.0, 1.0), rd::ValidationError);
    EXPECT_THROW(rd::f1_general(0.0, 1.0, 1.0, 1.0), rd::ValidationError);
}

TEST(F1, GeneralFamilyPole) {
    // The quadratic denominator has discriminant -4 A^4 f0^2, so for real
    // A, B it only vanishes through underflow.
    EXPECT_NO_THROW(rd::f1_general(1.0, 1.0, 0.0, 0.5));
    EXPECT_THROW(rd::f1_general(1.0, 1e-200, 0.0, 0.0), rd::PoleError);
}

TEST(SpecialPhase, Examples) {
    EXPECT_NEAR(rd::special_phase_a(1.0, 0.6), -0.0302937599187751014, 1e-15);
    EXPECT_NEAR(rd::special_phase_a(1.0, 1e-9), 0.0, 1e-15);
    EXPECT_THROW(rd::special_phase_a(1.0, 0.0), rd::ValidationError);
    EXPECT_THROW(rd::special_phase_a(1.0, 1.0), rd::ValidationError);
}

TEST(SpecialPhase, RecoversMonotoneLimit) {
    const double varpi = 1e-3;
    const auto s = rd::TransformSeed::oscillatory(1.0, varpi, rd::special_phase_a(1.0, varpi));
    const auto q = rd::q_trajectory(s);
    double worst = 0.0;
    for (double t = 0.0; t <= 10.0; t += 1e-3) worst = std::max(worst, std::abs(rd::transformed_drive(s, q, t) - rd::f1_monotone(1.0, t)));
    EXPECT_LE(worst, 1e-2);
}

TEST(WMatrix, Examples) {
    const auto s = rd::TransformSeed::oscillatory(1.0, 0.6, 0.0);
    EXPECT_EQ(rd::spinor_ratio({0.0, 2.0}), cplx(1.0, 0.0));
    EXPECT_EQ(rd::spinor_ratio({3.0, 0.0}), cplx(-1.0, 0.0));
    const rd::WMatrix w(cplx(0.0, -1.0) + 0.8 * rd::spinor_ratio({0.0, 1.0}));
    EXPECT_EQ(w.w1(), cplx(0.8, -1.0));
    EXPECT_EQ(w.w2(), cplx(0.8, 1.0));
    const auto q = rd::q_trajectory(s);
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> ut(0.0, 100.0);
    for (int i = 0; i < 100; ++i) {
        const double t = ut(rng);
        EXPECT_NEAR(std::abs(rd::spinor_ratio(q(t))), 1.0, 1e-15);
        const auto wm = rd::w_matrix(s, q, t);
        EXPECT_EQ(wm.w2(), std::conj(wm.w1()));
    }
}

TEST(Intertwiner, TransformedPairHasConstantDeterminant) {
    const auto s = rd::TransformSeed::oscillatory(1.0, 0.25, 0.015);
    const double xi = std::sqrt(3.0);
    const rd::SpinorState u0{1.0, 0.0}, v0{0.0, 1.0};
    const auto det_at = [&](double t) {
        const auto u = rd::apply_intertwiner(s, xi, rd::rabi_propagate(1.0, xi, u0, t), t);
        const auto v = rd::apply_intertwiner(s, xi, rd::rabi_propagate(1.0, xi, v0, t), t);
        return u.a1 * v.a2 - u.a2 * v.a1;
    };
    const cplx d0 = det_at(0.0);
    // det(M - W) = xi^2 + R^2 for the basis pair
    EXPECT_NEAR(std::abs(d0), 3.0 + 15.0 / 16.0, 1e-12);
    for (double t = 0.0; t < 50.0; t += 0.173) EXPECT_LE(std::abs(det_at(t) - d0), 1e-10 * std::abs(d0));
}

TEST(TransformedSolution, MonotoneFamilyMatchesClosedForm) {
    const rd::TimeGrid grid(0.0, 30.0, 3001);
    for (double f0 : {1.0, 0.4}) {
        const auto trace = rd::transformed_solution(rd::TransformSeed::monotone(f0), std::sqrt(3.0) * f0, {1.0, 0.0}, grid);
        const auto p = rd::probability(trace);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            EXPECT_NEAR(p.values()[i], monotone_p1(f0, grid[i]), 1e-10);
            EXPECT_NEAR(trace.values()[i].norm2(), 1.0, 1e-8);
        }
    }
}

TEST(TransformedSolution, GeneralXiMatchesClosedForm) {
    const rd::TimeGrid grid(0.0, 30.0, 3001);
    for (double xi : {0.3, 1.0, 2.5, 7.0}) {
        const auto p = rd::probability(rd::transformed_solution(rd::TransformSeed::monotone(1.0), xi, {1.0, 0.0}, grid));
        for (std::size_t i = 0; i < grid.size(); ++i)
            EXPECT_NEAR(p.values()[i], rd::p1_closed_form(xi, 1.0, grid[i]), 1e-10) << "xi=" << xi;
    }
}

TEST(TransformedSolution, OscillatoryMatchesOde) {
    const auto s = rd::TransformSeed::oscillatory(1.0, 0.25, 0.015);
    const double xi = std::sqrt(3.0);
    const rd::TimeGrid grid(0.0, 40.0, 4001);
    const auto exact = rd::transformed_solution(s, xi, {1.0, 0.0}, grid);
    const auto ode = rd::evolve(rd::DriveParams(xi, s.closed_form_drive()), {1.0, 0.0}, grid, 1e-10);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_LE(rd::max_abs(exact.values()[i] - ode.values()[i]), 1e-6);
    EXPECT_LE(rd::norm_drift(exact), 1e-8);
}

TEST(TransformedSolution, HonoursInitialValueAtGridStart) {
    const auto s = rd::TransformSeed::oscillatory(2.0, 1.1, -0.4);
    const rd::SpinorState init{cplx(0.6, 0.0), cplx(0.0, 0.8)};
    const auto trace = rd::transformed_solution(s, 0.9, init, rd::TimeGrid(3.0, 9.0, 61));
    EXPECT_LE(rd::max_abs(trace.values()[0] - init), 1e-14);
    EXPECT_THROW(rd::transformed_solution(s, 0.9, {1.0, 1.0}, rd::TimeGrid(0.0, 1.0, 3)), rd::ValidationError);
    EXPECT_THROW(rd::transformed_solution(s, 0.0, {1.0, 0.0}, rd::TimeGrid(0.0, 1.0, 3)), rd::ValidationError);
}

TEST(P1ClosedForm, Examples) {
    EXPECT_EQ(rd::p1_closed_form(std::sqrt(3.0), 1.0, 0.0), 0.0);
    EXPECT_NEAR(rd::p1_closed_form(std::sqrt(3.0), 1.0, 1.0), 0.6, 1e-15);
    EXPECT_NEAR(rd::p1_closed_form(std::sqrt(3.0), 1.0, 1e6), 0.75, 1e-12);
    EXPECT_THROW(rd::p1_closed_form(1.0, 1.0, -1.0), rd::ValidationError);
}

TEST(P1ClosedForm, DegeneratesToMonotoneForm) {
    for (double f0 : {0.2, 1.0, 3.0}) {
        double prev = 0.0;
        for (double t = 0.0; t < 50.0; t += 0.01) {
            const double p = rd::p1_closed_form(std::sqrt(3.0) * f0, f0, t);
            EXPECT_NEAR(p, monotone_p1(f0, t), 8.0 * 0x1p-52 * monotone_p1(f0, t));
            EXPECT_GE(p, prev);
            prev = p;
        }
    }
}

TEST(P1ClosedForm, IsAProbability) {
    for (double xi : {0.1, 0.9, 1.7, 4.0})
        for (double t = 0.0; t < 40.0; t += 0.05) {
            const double p = rd::p1_closed_form(xi, 0.8, t);
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0 + 1e-14);
        }
}
