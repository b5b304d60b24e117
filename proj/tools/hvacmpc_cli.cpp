#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hvac/bench.hpp"
#include "hvac/config.hpp"
#include "hvac/forecast.hpp"
#include "hvac/simulate.hpp"

using namespace hvac;

namespace {

// Flag values that override the config file when given.
struct Overrides {
    std::optional<int> horizon, ar_order, history_days, scenarios, days;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--horizon", horizon, "Prediction horizon N in hours")->check(CLI::PositiveNumber);
        cmd->add_option("--ar-order", ar_order, "AR order q")->check(CLI::PositiveNumber);
        cmd->add_option("--history-days", history_days, "Days of trailing data used for fitting")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--scenarios", scenarios, "Forecast scenarios S for the stochastic controller")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--days", days, "Simulated days")->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "Scenario seed; the storage noise seed is seed + 1");
        cmd->add_option("--backend", backend, "LP backend")->check(CLI::IsMember({"ipm", "simplex"}));
    }

    void apply(AppConfig& c) const {
        if (horizon) c.run.horizon = *horizon;
        if (ar_order) c.run.ar_order = *ar_order;
        if (history_days) c.run.history = 24 * *history_days;
        if (scenarios) c.scenarios = *scenarios;
        if (days) c.sim_days = *days;
        if (seed) {
            c.run.scenario_seed = *seed;
            c.run.noise_seed = *seed + 1;
        }
        if (backend) c.run.backend = lp::backend_from_name(*backend);
        c.finalize();
    }
};

AppConfig base_config(const std::string& path) { return path.empty() ? AppConfig{} : load_config(path); }

void check_length(const Trajectory& truth, const RunSpec& s, const std::string& path) {
    const std::size_t need = static_cast<std::size_t>(s.history) + s.sim_hours;
    if (truth.size() < need)
        throw std::runtime_error("data file " + path + " has " + std::to_string(truth.size()) + " hours; need " +
                                 std::to_string(s.history) + " of history plus " + std::to_string(s.sim_hours) +
                                 " simulated");
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop MPC of a central HVAC plant with thermal storage"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Write a synthetic campus disturbance CSV");
    std::uint64_t gen_seed = 1;
    int gen_days = 184 + 365, gen_start = 0;
    std::string gen_profile = "campus", gen_out;
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--days", gen_days, "Number of days to generate")->check(CLI::PositiveNumber);
    gen->add_option("--profile", gen_profile, "Seasonal profile")
        ->check(CLI::IsMember({"campus", "flat", "noiseless", "daily"}));
    gen->add_option("--start-day", gen_start, "Day of year of the first generated hour (0 = Jan 1)")
        ->check(CLI::Range(0, 364));
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    // run
    auto* run = app.add_subcommand("run", "Simulate one controller in closed loop");
    std::string run_controller, run_config, run_data, run_out, run_summary;
    std::optional<double> run_beta;
    Overrides run_ovr;
    run->add_option("--controller", run_controller, "det, sto or perf (a det:0.1 style token is also accepted)")
        ->required();
    run->add_option("--config", run_config, "JSON config file")->check(CLI::ExistingFile);
    run->add_option("--data", run_data, "Disturbance CSV (history followed by the simulated hours)")->required();
    run->add_option("--out", run_out, "Trace CSV path")->required();
    run->add_option("--beta", run_beta, "Storage buffer fraction in [0, 0.5)");
    run->add_option("--summary", run_summary, "Also write the JSON summary to this path");
    run_ovr.add_to(run);

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark controllers over a validation set");
    std::string b_config, b_data, b_out, b_runs, b_cdf, b_controllers = "det:0.1,sto:0,perf";
    std::optional<int> b_count, b_jobs;
    std::optional<double> b_amplitude;
    Overrides b_ovr;
    bench->add_option("--config", b_config, "JSON config file")->check(CLI::ExistingFile);
    bench->add_option("--data", b_data, "Base disturbance CSV")->required();
    bench->add_option("--validation-count", b_count, "Validation scenarios K")->check(CLI::PositiveNumber);
    bench->add_option("--controllers", b_controllers, "Comma-separated controller tokens, e.g. det:0.1,sto:0,perf");
    bench->add_option("--out", b_out, "Report JSON path")->required();
    bench->add_option("--runs-csv", b_runs, "Per-run rows as CSV");
    bench->add_option("--cdf-csv", b_cdf, "Empirical CDF grids as CSV");
    bench->add_option("--jobs", b_jobs, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    bench->add_option("--amplitude", b_amplitude, "Relative amplitude of validation perturbations")
        ->check(CLI::NonNegativeNumber);
    b_ovr.add_to(bench);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto profile = profile_by_name(gen_profile);
            profile.start_day_of_year = gen_start;
            const auto t = generate_synthetic_campus(gen_seed, gen_days, profile);
            write_trajectory_csv(gen_out, t);
            std::cerr << "wrote " << t.size() << " hours to " << gen_out << "\n";
        } else if (*run) {
            AppConfig cfg = base_config(run_config);
            run_ovr.apply(cfg);
            RunSpec spec = cfg.run;
            spec.controller = ControllerSpec::parse(run_controller, cfg.scenarios);
            if (run_beta) {
                if (spec.controller.kind == ControllerKind::Perfect)
                    throw CLI::ValidationError("--beta", "perf takes no buffer");
                spec.controller.beta = *run_beta;
            }
            const auto truth = read_trajectory_csv(run_data);
            check_length(truth, spec, run_data);
            const auto tr = run_closed_loop(cfg.plant, spec, truth);
            write_trace_csv(run_out, tr);
            const auto summary = trace_summary(cfg.plant, tr, truth, spec.history).dump(2);
            if (!run_summary.empty()) write_text(run_summary, summary + "\n");
            std::cout << summary << "\n";
        } else if (*bench) {
            AppConfig cfg = base_config(b_config);
            if (b_count) cfg.bench.validation_count = *b_count;
            if (b_jobs) cfg.bench.jobs = *b_jobs;
            if (b_amplitude) cfg.bench.validation.amplitude = *b_amplitude;
            b_ovr.apply(cfg);
            std::vector<ControllerSpec> specs;
            std::stringstream ss(b_controllers);
            for (std::string tok; std::getline(ss, tok, ',');)
                if (!tok.empty()) specs.push_back(ControllerSpec::parse(tok, cfg.scenarios));
            if (specs.empty()) throw CLI::ValidationError("--controllers", "no controller given");
            const auto truth = read_trajectory_csv(b_data);
            check_length(truth, cfg.bench.base, b_data);
            const auto rep = run_benchmark(cfg.plant, cfg.bench, specs, truth);
            write_text(b_out, nlohmann::json(rep).dump(2) + "\n");
            if (!b_runs.empty()) {
                std::ostringstream os;
                write_runs_csv(os, rep);
                write_text(b_runs, os.str());
            }
            if (!b_cdf.empty()) {
                std::ostringstream os;
                write_cdf_csv(os, rep);
                write_text(b_cdf, os.str());
            }
            for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
            for (const auto& s : rep.summaries)
                std::cout << s.controller << ": cost " << s.cost.mean << " +- " << s.cost.se << ", ccp " << s.ccp.mean
                          << " +- " << s.ccp.se << ", violations/100h " << s.violations.mean << "\n";
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
