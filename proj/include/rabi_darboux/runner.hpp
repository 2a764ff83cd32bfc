#pragma once

// Building blocks of the command-line front end: tables for each command,
// the figure parameter sets, parameter sweeps and the verification suite.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "rabi_darboux/csv.hpp"
#include "rabi_darboux/darboux.hpp"
#include "rabi_darboux/integrator.hpp"
#include "rabi_darboux/observables.hpp"
#include "rabi_darboux/susy_checks.hpp"
#include "rabi_darboux/twolevel.hpp"

namespace rabi_darboux::runner {

// ---------------------------------------------------------------------------
// Configuration helpers

// Exactly one of xi / omega0; omega0^2 = f0^2 + xi^2.
inline double resolve_xi(double f0, std::optional<double> xi, std::optional<double> omega0) {
    detail::require(xi.has_value() != omega0.has_value(), "give exactly one of --xi and --omega0");
    if (xi) {
        detail::require(std::isfinite(*xi) && *xi > 0.0, "--xi must be positive");
        return *xi;
    }
    detail::require(std::isfinite(*omega0) && *omega0 > std::abs(f0), "--omega0 must exceed |f0|");
    return std::sqrt((*omega0 - f0) * (*omega0 + f0));
}

// Explicit value, else RABI_DARBOUX_JOBS, else hardware concurrency.
inline unsigned resolve_jobs(std::optional<unsigned> flag) {
    if (flag) {
        detail::require(*flag >= 1, "--jobs must be at least 1");
        return *flag;
    }
    if (const char* env = std::getenv("RABI_DARBOUX_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        detail::require(end != env && *end == '\0' && v >= 1, "RABI_DARBOUX_JOBS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n) on `jobs` workers. The first exception thrown
// by any task is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t n, unsigned jobs, Body&& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
            }
        }
    };
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

inline DriveProfile read_tabulated_drive(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open drive table " + path);
    std::vector<double> times, values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double t = 0.0, f = 0.0;
        if (!(fields >> t >> f)) {
            if (times.empty() && line_no == 1) continue; // header row
            throw ValidationError("drive table " + path + ": malformed line " + std::to_string(line_no));
        }
        times.push_back(t);
        values.push_back(f);
    }
    return DriveProfile::tabulated(std::move(times), std::move(values));
}

// ---------------------------------------------------------------------------
// Single-run tables

inline Table rabi_table(double f0, double xi, const TimeGrid& grid, std::optional<double> ode_tol) {
    const auto t = grid.samples();
    std::vector<double> p(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) p[i] = rabi_probability(xi, f0, t[i] - grid.t0());
    Table table({{"t", t}, {"P", std::move(p)}});
    if (ode_tol) {
        const auto ode = probability(evolve(DriveParams(xi, DriveProfile::constant(f0)), {1.0, 0.0}, grid, *ode_tol));
        table.add({"P_ode", {ode.values().begin(), ode.values().end()}});
    }
    return table;
}

inline Table state_table(const StateTrace& trace) {
    std::vector<double> t(trace.times().begin(), trace.times().end());
    std::vector<double> a1r, a1i, a2r, a2i, p, n2;
    for (const auto& s : trace.values()) {
        a1r.push_back(s.a1.real());
        a1i.push_back(s.a1.imag());
        a2r.push_back(s.a2.real());
        a2i.push_back(s.a2.imag());
        p.push_back(std::norm(s.a2) / s.norm2());
        n2.push_back(s.norm2());
    }
    return Table({{"t", std::move(t)},
                  {"a1_re", std::move(a1r)},
                  {"a1_im", std::move(a1i)},
                  {"a2_re", std::move(a2r)},
                  {"a2_im", std::move(a2i)},
                  {"P", std::move(p)},
                  {"norm2", std::move(n2)}});
}

inline Table simulate_table(const DriveParams& params, const TimeGrid& grid, double tol) {
    return state_table(evolve(params, {1.0, 0.0}, grid, tol));
}

inline Table transform_table(const TransformSeed& seed, double xi, const TimeGrid& grid, std::optional<double> ode_tol) {
    const auto trace = transformed_solution(seed, xi, {1.0, 0.0}, grid);
    const auto p = probability(trace);
    const QTrajectory q(seed);
    std::vector<double> f1;
    for (double t : trace.times()) f1.push_back(transformed_drive(seed, q, t));
    Table table({{"t", {trace.times().begin(), trace.times().end()}},
                 {"f1", std::move(f1)},
                 {"P", {p.values().begin(), p.values().end()}}});
    if (ode_tol) {
        const auto ode = probability(evolve(DriveParams(xi, seed.closed_form_drive()), {1.0, 0.0}, grid, *ode_tol));
        table.add({"P_ode", {ode.values().begin(), ode.values().end()}});
    }
    return table;
}

inline Table detuning_table(const DriveProfile& drive, const TimeGrid& grid) {
    const auto delta = detuning_trace(drive, grid);
    std::vector<double> f1;
    for (double t : delta.times()) f1.push_back(drive(t));
    return Table({{"t", {delta.times().begin(), delta.times().end()}},
                  {"f1", std::move(f1)},
                  {"delta1", {delta.values().begin(), delta.values().end()}}});
}

// ---------------------------------------------------------------------------
// Figures

struct Curve {
    std::string name;
    Table table;
};

inline constexpr std::string_view figure_ids[] = {"fig1a", "fig1b", "fig2a", "fig2b", "fig3"};

// [0, 40] covers at least two slow periods for every oscillating figure curve
// (varpi >= 1/6).
inline TimeGrid default_figure_grid() { return TimeGrid(0.0, 40.0, 4001); }

inline Curve probability_curve(std::string name, const TransformSeed& seed, double xi, const TimeGrid& grid) {
    const auto trace = transformed_solution(seed, xi, {1.0, 0.0}, grid);
    const auto p = probability(trace);
    const QTrajectory q(seed);
    std::vector<double> f1;
    for (double t : trace.times()) f1.push_back(transformed_drive(seed, q, t));
    return {std::move(name),
            Table({{"t", {trace.times().begin(), trace.times().end()}},
                   {"P1", {p.values().begin(), p.values().end()}},
                   {"f1", std::move(f1)}})};
}

inline Curve detuning_curve(std::string name, const TransformSeed& seed, const TimeGrid& grid) {
    return {std::move(name), detuning_table(seed.closed_form_drive(), grid)};
}

// Parameter sets (f0 = 1 throughout):
//   fig1a  P1,     Omega0 = 2, a = 0.015, varpi in {1/4, 1/6}
//   fig1b  delta1, same, plus the limiting curve varpi = 1e-3, a = 1e-6
//   fig2a  P1,     Omega0 = 2, varpi = 1/5, a in {0, 0.02, 0.08}
//   fig2b  delta1, same
//   fig3   P1,     a = 0, varpi = 0.2, Omega0 in {2, 1.6, 1.2}
inline std::vector<Curve> figure_curves(std::string_view id, const TimeGrid& grid = default_figure_grid()) {
    constexpr double f0 = 1.0;
    const double xi2 = std::sqrt(3.0); // Omega0 = 2
    std::vector<Curve> curves;
    if (id == "fig1a" || id == "fig1b") {
        const bool probability = id == "fig1a";
        const std::pair<const char*, double> varpis[] = {{"varpi_1_4", 0.25}, {"varpi_1_6", 1.0 / 6.0}};
        for (const auto& [label, w] : varpis) {
            const auto seed = TransformSeed::oscillatory(f0, w, 0.015);
            const std::string name = std::string(id) + "_" + label;
            curves.push_back(probability ? probability_curve(name, seed, xi2, grid) : detuning_curve(name, seed, grid));
        }
        if (!probability)
            curves.push_back(detuning_curve("fig1b_varpi_1e-3", TransformSeed::oscillatory(f0, 1e-3, 1e-6), grid));
    } else if (id == "fig2a" || id == "fig2b") {
        const std::pair<const char*, double> phases[] = {{"a_0", 0.0}, {"a_0.02", 0.02}, {"a_0.08", 0.08}};
        for (const auto& [label, a] : phases) {
            const auto seed = TransformSeed::oscillatory(f0, 0.2, a);
            const std::string name = std::string(id) + "_" + label;
            curves.push_back(id == "fig2a" ? probability_curve(name, seed, xi2, grid) : detuning_curve(name, seed, grid));
        }
    } else if (id == "fig3") {
        const std::pair<const char*, double> omegas[] = {{"omega0_2", 2.0}, {"omega0_1.6", 1.6}, {"omega0_1.2", 1.2}};
        for (const auto& [label, om] : omegas) {
            const auto seed = TransformSeed::oscillatory(f0, 0.2, 0.0);
            curves.push_back(probability_curve(std::string("fig3_") + label, seed, resolve_xi(f0, std::nullopt, om), grid));
        }
    } else {
        throw ValidationError("unknown figure id '" + std::string(id) + "' (expected fig1a, fig1b, fig2a, fig2b or fig3)");
    }
    return curves;
}

// ---------------------------------------------------------------------------
// Sweeps

// A phase value, or the phase that recovers the monotone drive as varpi -> 0.
struct PhaseChoice {
    bool special = false;
    double value = 0.0;

    double resolve(double f0, double varpi) const { return special ? special_phase_a(f0, varpi) : value; }
};

inline PhaseChoice parse_phase(std::string_view token) {
    if (token == "special") return {true, 0.0};
    const std::string s(token);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    detail::require(!s.empty() && end == s.c_str() + s.size() && std::isfinite(v), "phase must be a number or 'special'");
    return {false, v};
}

struct SweepConfig {
    double f0 = 1.0;
    std::vector<double> varpi;
    std::vector<PhaseChoice> a;
    std::vector<double> omega0;
    // Fixed end time; default is three slow periods, 3 pi / varpi.
    std::optional<double> t1;
    double dt = 0.01;
};

inline constexpr std::size_t sweep_budget = 100'000;

struct SweepRow {
    double varpi = 0.0;
    double a = 0.0;
    double omega0 = 0.0;
    double xi = 0.0;
    bool oscillating = false;
    double fast = NAN;
    double slow = NAN;
    double fast_amplitude = NAN;
    double slow_amplitude = NAN;
    // Over the last slow period [t1 - pi/varpi, t1].
    double plain_min = NAN;
    double window_floor = NAN;
};

inline SweepRow sweep_point(double f0, double varpi, const PhaseChoice& phase, double omega0,
                            std::optional<double> t1_override, double dt) {
    SweepRow row;
    row.varpi = varpi;
    row.omega0 = omega0;
    row.a = phase.resolve(f0, varpi);
    row.xi = resolve_xi(f0, std::nullopt, omega0);
    const double slow_period = std::numbers::pi / varpi;
    const double t1 = t1_override.value_or(3.0 * slow_period);
    const auto n = static_cast<std::size_t>(std::llround(t1 / dt)) + 1;
    const TimeGrid grid(0.0, t1, std::max<std::size_t>(n, 2));
    const auto seed = TransformSeed::oscillatory(f0, varpi, row.a);
    const auto p = probability(transformed_solution(seed, row.xi, {1.0, 0.0}, grid));

    try {
        const auto est = oscillation_frequencies(p);
        row.oscillating = est.oscillating;
        row.fast = est.fast;
        row.slow = est.slow;
        row.fast_amplitude = est.fast_amplitude;
        row.slow_amplitude = est.slow_amplitude;
    } catch (const ValidationError&) {
        // span too short for this point; estimates stay NaN
    }
    const Interval last{std::max(0.0, t1 - slow_period), t1};
    // Half a slow period, but never less than two fast periods.
    const double window = std::min(last.to - last.from, std::max(0.5 * slow_period, 2.0 * std::numbers::pi / omega0));
    try {
        const auto env = envelope_minimum(p, window, last);
        row.plain_min = env.plain_min;
        row.window_floor = env.window_floor;
    } catch (const ValidationError&) {
    }
    return row;
}

// Rows in lexicographic order over (varpi, a, omega0) as listed.
inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg, unsigned jobs) {
    detail::require(!cfg.varpi.empty() && !cfg.a.empty() && !cfg.omega0.empty(), "sweep: parameter lists must be nonempty");
    detail::require(cfg.dt > 0.0, "sweep: dt must be positive");
    const std::size_t total = cfg.varpi.size() * cfg.a.size() * cfg.omega0.size();
    detail::require(total <= sweep_budget, "sweep: more than 100000 parameter points");
    for (double w : cfg.varpi) detail::require(w > 0.0 && w < cfg.f0, "sweep: varpi values must lie in (0, f0)");
    for (double om : cfg.omega0) detail::require(om > std::abs(cfg.f0), "sweep: omega0 values must exceed |f0|");

    std::vector<SweepRow> rows(total);
    parallel_for(total, jobs, [&](std::size_t k) {
        const std::size_t io = k % cfg.omega0.size();
        const std::size_t ia = (k / cfg.omega0.size()) % cfg.a.size();
        const std::size_t iw = k / (cfg.omega0.size() * cfg.a.size());
        rows[k] = sweep_point(cfg.f0, cfg.varpi[iw], cfg.a[ia], cfg.omega0[io], cfg.t1, cfg.dt);
    });
    return rows;
}

inline Table sweep_table(const std::vector<SweepRow>& rows) {
    Table table;
    const auto col = [&](const char* name, auto member) {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(static_cast<double>(r.*member));
        table.add({name, std::move(v)});
    };
    col("varpi", &SweepRow::varpi);
    col("a", &SweepRow::a);
    col("omega0", &SweepRow::omega0);
    col("xi", &SweepRow::xi);
    col("oscillating", &SweepRow::oscillating);
    col("fast", &SweepRow::fast);
    col("slow", &SweepRow::slow);
    col("fast_amplitude", &SweepRow::fast_amplitude);
    col("slow_amplitude", &SweepRow::slow_amplitude);
    col("plain_min", &SweepRow::plain_min);
    col("window_floor", &SweepRow::window_floor);
    return table;
}

// ---------------------------------------------------------------------------
// Verification suite

struct VerifyConfig {
    std::size_t seed_count = 100;
    std::uint64_t rng_seed = 20050127;
    double tolerance = 1e-8;
    bool inject_fault = false;
};

struct VerifyLine {
    std::string check;
    double max_residual = 0.0;
    double tolerance = 0.0;
    std::string worst_case;

    bool pass() const noexcept { return max_residual <= tolerance; }
};

struct VerifyReport {
    std::vector<VerifyLine> lines;

    bool pass() const noexcept {
        return std::all_of(lines.begin(), lines.end(), [](const VerifyLine& l) { return l.pass(); });
    }
};

struct RandomSeedCase {
    double f0;
    double varpi;
    double a;
    double xi;

    TransformSeed seed() const { return TransformSeed::oscillatory(f0, varpi, a); }

    std::string describe() const {
        return "f0=" + format_number(f0) + " varpi=" + format_number(varpi) + " a=" + format_number(a) +
               " xi=" + format_number(xi);
    }
};

// f0 in [0.1, 10], varpi / f0 in (0, 1), a in [-1, 1], xi in [0.1, 10].
inline std::vector<RandomSeedCase> random_seed_cases(std::size_t count, std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> f0_dist(0.1, 10.0), ratio(1e-3, 1.0 - 1e-3), a_dist(-1.0, 1.0),
        xi_dist(0.1, 10.0);
    std::vector<RandomSeedCase> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double f0 = f0_dist(rng);
        const double r = ratio(rng);
        const double a = a_dist(rng);
        out.push_back({f0, r * f0, a, xi_dist(rng)});
    }
    return out;
}

namespace detail {

inline void absorb(VerifyLine& line, double value, const std::string& where) {
    if (!(value <= line.max_residual)) {
        line.max_residual = value;
        line.worst_case = where;
    }
}

inline double max_abs_difference(const ScalarTrace& a, const ScalarTrace& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

} // namespace detail

inline VerifyReport run_verify(const VerifyConfig& cfg, unsigned jobs) {
    rabi_darboux::detail::require(cfg.seed_count >= 1, "verify: seed count must be at least 1");
    const auto cases = random_seed_cases(cfg.seed_count, cfg.rng_seed);
    const TimeGrid grid(0.0, 20.0, 401);
    CheckOptions faulty;
    if (cfg.inject_fault) faulty.w1_shift = cplx{1e-3, 0.0};

    struct PerSeed {
        double riccati, intertwining, factorization, adjoint;
    };
    std::vector<PerSeed> per_seed(cases.size());
    parallel_for(cases.size(), jobs, [&](std::size_t i) {
        const auto& c = cases[i];
        const auto seed = c.seed();
        const QTrajectory q(seed);
        double ric = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) ric = std::max(ric, std::abs(q.riccati_residual(grid[k])));
        per_seed[i] = {ric, intertwining_residual(seed, c.xi, grid, faulty).max_abs,
                       factorization_residual(seed, c.xi, grid).max_abs,
                       pseudo_adjoint_consistency(seed, c.xi, grid).max_abs};
    });

    VerifyReport report;
    VerifyLine ric{"riccati", 0.0, cfg.tolerance, {}}, inter{"intertwining", 0.0, cfg.tolerance, {}},
        fact{"factorization", 0.0, cfg.tolerance, {}}, adj{"pseudo-adjoint", 0.0, cfg.tolerance, {}};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto where = "seed #" + std::to_string(i) + " (" + cases[i].describe() + ")";
        detail::absorb(ric, per_seed[i].riccati, where);
        detail::absorb(inter, per_seed[i].intertwining, where);
        detail::absorb(fact, per_seed[i].factorization, where);
        detail::absorb(adj, per_seed[i].adjoint, where);
    }
    report.lines = {ric, inter, fact, adj};

    // Closed forms against the numerical integrator.
    const double xi3 = std::sqrt(3.0);
    {
        const TimeGrid g(0.0, 20.0 / 2.0, 2001);
        std::vector<double> exact;
        for (double t : g.samples()) exact.push_back(rabi_probability(xi3, 1.0, t));
        const auto ode = probability(evolve(DriveParams(xi3, DriveProfile::constant(1.0)), {1.0, 0.0}, g, 1e-10));
        VerifyLine line{"rabi-vs-ode", 0.0, 1e-8, "f0=1 xi=sqrt(3)"};
        line.max_residual = detail::max_abs_difference(ode, ScalarTrace(g.samples(), exact, "probability"));
        report.lines.push_back(line);
    }
    {
        const TimeGrid g(0.0, 20.0, 2001);
        const auto seed = TransformSeed::monotone(1.0);
        const auto darboux = probability(transformed_solution(seed, xi3, {1.0, 0.0}, g));
        const auto ode = probability(evolve(DriveParams(xi3, seed.closed_form_drive()), {1.0, 0.0}, g, 1e-10));
        std::vector<double> exact;
        for (double t : g.samples()) exact.push_back(3.0 * t * t / (1.0 + 4.0 * t * t));
        const ScalarTrace eq(g.samples(), exact, "probability");
        VerifyLine line{"monotone-vs-closed-form", 0.0, 1e-6, "f0=1 xi=sqrt(3)"};
        line.max_residual = std::max(detail::max_abs_difference(darboux, eq), detail::max_abs_difference(ode, eq));
        report.lines.push_back(line);
    }
    {
        const TimeGrid g(0.0, 20.0, 2001);
        const auto seed = TransformSeed::monotone(1.0);
        VerifyLine line{"transformed-vs-p1-closed-form", 0.0, 1e-10, {}};
        for (double xi : {0.5, 1.0, 2.5}) {
            const auto p = probability(transformed_solution(seed, xi, {1.0, 0.0}, g));
            double m = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                m = std::max(m, std::abs(p.values()[i] - p1_closed_form(xi, 1.0, p.times()[i])));
            detail::absorb(line, m, "f0=1 xi=" + format_number(xi));
        }
        report.lines.push_back(line);
    }
    {
        const TimeGrid g = default_figure_grid();
        const auto seed = TransformSeed::oscillatory(1.0, 0.25, 0.015);
        const auto darboux = probability(transformed_solution(seed, xi3, {1.0, 0.0}, g));
        const auto ode = probability(evolve(DriveParams(xi3, seed.closed_form_drive()), {1.0, 0.0}, g, 1e-10));
        VerifyLine line{"oscillatory-vs-ode", 0.0, 1e-6, "f0=1 omega0=2 varpi=1/4 a=0.015"};
        line.max_residual = detail::max_abs_difference(darboux, ode);
        report.lines.push_back(line);
    }
    return report;
}

inline void print_report(std::ostream& os, const VerifyReport& report) {
    os << "check                          max residual             tolerance  status\n";
    for (const auto& l : report.lines) {
        std::string check = l.check;
        check.resize(std::max<std::size_t>(check.size(), 30), ' ');
        std::string value = format_number(l.max_residual);
        value.resize(std::max<std::size_t>(value.size(), 24), ' ');
        std::string tol = format_number(l.tolerance);
        tol.resize(std::max<std::size_t>(tol.size(), 10), ' ');
        os << check << ' ' << value << ' ' << tol << ' ' << (l.pass() ? "ok" : "FAIL");
        if (!l.pass()) os << "  worst: " << l.worst_case;
        os << '\n';
    }
    os << (report.pass() ? "all checks passed\n" : "verification FAILED\n");
}

} // namespace rabi_darboux::runner
