// rabi_darboux: command-line front end.
//
//   rabi_darboux rabi      --f0 1 --xi 1.7320508 [--ode]
//   rabi_darboux simulate  --drive oscillatory --f0 1 --omega0 2 --varpi 0.25 --a 0.015
//   rabi_darboux transform --f0 1 --omega0 2 --varpi 0.25 --a 0.015 [--ode]
//   rabi_darboux detuning  --drive monotone --f0 1
//   rabi_darboux figure fig1a --out figures/
//   rabi_darboux verify [--seed-count 1000] [--inject-fault]
//   rabi_darboux sweep --varpi-list 0.05,0.1 --a-list 0,special --omega0-list 1.8,2
//
// Exit codes: 0 success, 1 validation error, 2 numeric failure, 3 I/O error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rabi_darboux/rabi_darboux.hpp"

namespace rd = rabi_darboux;

namespace {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumeric = 2, kIo = 3 };

struct Options {
    double f0 = 1.0;
    std::optional<double> xi;
    std::optional<double> omega0;
    double varpi = 0.0;
    double a = 0.0;
    bool special_a = false;
    double t1 = 40.0;
    std::size_t n = 4001;
    double tol = 1e-10;
    std::string out;
    std::optional<unsigned> jobs;
    std::size_t seed_count = 100;
    std::uint64_t rng_seed = rd::runner::VerifyConfig{}.rng_seed;
    bool inject_fault = false;
    bool with_ode = false;
    std::string drive;
    std::string table;
    std::string figure_id;
    std::vector<double> varpi_list;
    std::vector<std::string> a_list;
    std::vector<double> omega0_list;
    double dt = 0.01;
};

void emit(const rd::Table& table, const std::string& out) {
    if (out.empty() || out == "-") {
        rd::write_csv(std::cout, table);
        std::cout.flush();
        if (!std::cout) throw rd::IoError("write to stdout failed");
    } else {
        rd::write_csv_file(out, table);
    }
}

rd::DriveProfile build_drive(const Options& o) {
    if (o.drive == "constant") return rd::DriveProfile::constant(o.f0);
    if (o.drive == "monotone") return rd::DriveProfile::monotone_limit(o.f0);
    if (o.drive == "oscillatory") {
        const double a = o.special_a ? rd::special_phase_a(o.f0, o.varpi) : o.a;
        return rd::DriveProfile::oscillatory(o.f0, o.varpi, a);
    }
    if (o.table.empty()) throw rd::ValidationError("--drive tabulated needs --table <file>");
    return rd::runner::read_tabulated_drive(o.table);
}

rd::TransformSeed build_seed(const Options& o) {
    if (o.varpi == 0.0) return rd::TransformSeed::monotone(o.f0);
    const double a = o.special_a ? rd::special_phase_a(o.f0, o.varpi) : o.a;
    return rd::TransformSeed::oscillatory(o.f0, o.varpi, a);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exactly solvable two-level drives from intertwining (Darboux) transformations"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file; command-line flags take precedence");

    Options o;
    app.add_option("--f0", o.f0, "constant detuning term f0 (rad/time)")->capture_default_str();
    auto* xi_opt = app.add_option("--xi", o.xi, "coupling xi, half the Rabi frequency");
    auto* om_opt = app.add_option("--omega0", o.omega0, "Omega0 = sqrt(f0^2 + xi^2), alternative to --xi");
    xi_opt->excludes(om_opt);
    app.add_option("--varpi", o.varpi, "varpi of the transformation (0: monotone family)")->capture_default_str();
    app.add_option("--a", o.a, "phase a of the oscillatory family")->capture_default_str();
    app.add_flag("--special-a", o.special_a, "use the phase that recovers the monotone drive as varpi -> 0");
    auto* t1_opt = app.add_option("--t1", o.t1, "end time (grid starts at 0)")->capture_default_str();
    app.add_option("--n", o.n, "number of samples")->capture_default_str();
    app.add_option("--tol", o.tol, "integrator tolerance")->capture_default_str();
    app.add_option("--out", o.out, "output file (figure: directory); default stdout / current directory");
    app.add_option("--jobs", o.jobs, "worker threads (fallback: RABI_DARBOUX_JOBS)");
    app.add_option("--seed-count", o.seed_count, "randomised seeds for verify")->capture_default_str();

    auto* rabi = app.add_subcommand("rabi", "constant-drive Rabi probability");
    rabi->add_flag("--ode", o.with_ode, "add the numerically integrated column");

    const std::vector<std::string> drives{"constant", "monotone", "oscillatory", "tabulated"};
    auto* simulate = app.add_subcommand("simulate", "integrate the equations of motion numerically");
    simulate->add_option("--drive", o.drive, "drive law")->required()->check(CLI::IsMember(drives));
    simulate->add_option("--table", o.table, "two-column t,f file for --drive tabulated");

    auto* transform = app.add_subcommand("transform", "closed-form transformed solution");
    transform->add_flag("--ode", o.with_ode, "add the numerically integrated column");

    auto* detuning = app.add_subcommand("detuning", "detuning delta1(t) reconstructed from the drive");
    detuning->add_option("--drive", o.drive, "drive law")->required()->check(CLI::IsMember(drives));
    detuning->add_option("--table", o.table, "two-column t,f file for --drive tabulated");

    auto* figure = app.add_subcommand("figure", "write the CSV data behind a figure, one file per curve");
    figure->add_option("id", o.figure_id, "fig1a | fig1b | fig2a | fig2b | fig3")->required();

    auto* verify = app.add_subcommand("verify", "identity residuals and closed-form vs integrator checks");
    verify->add_flag("--inject-fault", o.inject_fault, "perturb W to exercise the failure path");
    verify->add_option("--rng-seed", o.rng_seed, "seed of the randomised sweep")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "frequency and envelope statistics over a parameter grid");
    sweep->add_option("--varpi-list", o.varpi_list)->required()->delimiter(',');
    sweep->add_option("--a-list", o.a_list, "numbers or 'special'")->required()->delimiter(',');
    sweep->add_option("--omega0-list", o.omega0_list)->required()->delimiter(',');
    sweep->add_option("--dt", o.dt, "sample spacing")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::FileError& e) {
        app.exit(e);
        return kIo;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (*figure) {
            const std::filesystem::path dir = o.out.empty() ? "." : o.out;
            std::filesystem::create_directories(dir);
            for (const auto& curve : rd::runner::figure_curves(o.figure_id, rd::TimeGrid(0.0, o.t1, o.n))) {
                const auto path = (dir / (curve.name + ".csv")).string();
                rd::write_csv_file(path, curve.table);
                std::cout << path << '\n';
            }
            return kOk;
        }
        if (*verify) {
            rd::runner::VerifyConfig cfg;
            cfg.seed_count = o.seed_count;
            cfg.rng_seed = o.rng_seed;
            cfg.inject_fault = o.inject_fault;
            const auto report = rd::runner::run_verify(cfg, rd::runner::resolve_jobs(o.jobs));
            rd::runner::print_report(std::cout, report);
            return report.pass() ? kOk : kNumeric;
        }
        if (*sweep) {
            rd::runner::SweepConfig cfg;
            cfg.f0 = o.f0;
            cfg.varpi = o.varpi_list;
            for (const auto& token : o.a_list) cfg.a.push_back(rd::runner::parse_phase(token));
            cfg.omega0 = o.omega0_list;
            if (t1_opt->count() > 0) cfg.t1 = o.t1;
            cfg.dt = o.dt;
            emit(rd::runner::sweep_table(rd::runner::run_sweep(cfg, rd::runner::resolve_jobs(o.jobs))), o.out);
            return kOk;
        }

        const rd::TimeGrid grid(0.0, o.t1, o.n);
        const auto xi = [&] { return rd::runner::resolve_xi(o.f0, o.xi, o.omega0); };
        if (*rabi) {
            emit(rd::runner::rabi_table(o.f0, xi(), grid, o.with_ode ? std::optional(o.tol) : std::nullopt), o.out);
        } else if (*simulate) {
            emit(rd::runner::simulate_table(rd::DriveParams(xi(), build_drive(o)), grid, o.tol), o.out);
        } else if (*transform) {
            emit(rd::runner::transform_table(build_seed(o), xi(), grid, o.with_ode ? std::optional(o.tol) : std::nullopt),
                 o.out);
        } else if (*detuning) {
            emit(rd::runner::detuning_table(build_drive(o), grid), o.out);
        }
        return kOk;
    } catch (const rd::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const rd::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kNumeric;
    } catch (const rd::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    }
}
