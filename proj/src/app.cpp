#include "pwmstab/app.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "pwmstab/config.hpp"
#include "pwmstab/corpus.hpp"
#include "pwmstab/numerics.hpp"
#include "pwmstab/orbit.hpp"
#include "pwmstab/report.hpp"
#include "pwmstab/simulator.hpp"
#include "pwmstab/stability.hpp"
#include "pwmstab/svg.hpp"
#include "pwmstab/sweep.hpp"
#include "pwmstab/verify.hpp"

namespace pwmstab {

namespace {

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

std::string yesno(bool b) { return b ? "1" : "0"; }

std::string describe(const RunConfig& cfg) {
    std::ostringstream s;
    s << "configuration: "
      << (cfg.converter.topology == Topology::buck ? "buck" : "boost")
      << "  L=" << format_g12(cfg.converter.inductance_L)
      << " C=" << format_g12(cfg.converter.capacitance_C)
      << " R=" << format_g12(cfg.converter.load_R)
      << " vs=" << format_g12(cfg.converter.source_vs)
      << " T=" << format_g12(cfg.converter.period_T)
      << " rC=" << format_g12(cfg.converter.esr_rC)
      << " rL=" << format_g12(cfg.converter.resistance_rL) << "\n"
      << "control: i_c=" << format_g12(cfg.control.i_c)
      << " m_c=" << format_g12(cfg.control.m_c)
      << " feedback=" << cfg.control.feedback << "\n";
    return s.str();
}

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.sweep)
        err << "warning: sweep section present but ignored by analyze\n";

    const PiecewiseAffineModel model = build_converter(cfg.converter);
    const SwitchingRule rule = cfg.make_rule();
    OrbitOptions oopts;
    oopts.tol = cfg.solver.orbit_tol;
    SimOptions sopts;
    sopts.event_tol_rel = cfg.solver.event_tol_rel;

    PeriodicOrbit orbit;
    try {
        orbit = find_periodic_orbit(model, rule, {}, oopts);
    } catch (const Error& e) {
        err << "orbit solve failed: " << e.what() << "\n";
        return exit_solver_failure;
    }

    const StabilityReport rep =
        build_report(orbit, model, rule, /*with_gains=*/true, sopts);
    const StabilityProbe probe =
        probe_orbital_stability(model, rule, orbit, 1e-5, 200, sopts);

    out << describe(cfg);
    out << "orbit: d=" << format_g12(orbit.switch_time_d)
        << " duty=" << format_g12(orbit.switch_time_d / model.period_T)
        << " residual=" << format_g12(orbit.residual_norm) << "\n";
    out << "x0: iL=" << format_g12(orbit.x0(0))
        << " vC=" << format_g12(orbit.x0(1)) << "\n";
    out << "eigenvalues:";
    for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i)
        out << " (" << format_g12(rep.eigenvalues(i).real()) << ", "
            << format_g12(rep.eigenvalues(i).imag()) << "i)";
    out << "\n";
    out << "spectral radius: " << format_g12(rep.spectral_radius)
        << "  det: " << format_g12(rep.det_phi)
        << "  exact verdict: " << to_string(rep.verdict_exact) << "\n";
    out << "necessary condition: lhs=" << format_g12(rep.nc_lhs)
        << " rhs=" << format_g12(rep.nc_rhs)
        << " log_margin=" << format_g12(rep.nc_log_margin)
        << " holds=" << yesno(rep.nc_holds) << "\n";
    out << "slope criterion: inst=" << format_g12(rep.slope_ratio_inst)
        << " holds=" << yesno(rep.slope_holds_inst)
        << " ; linear=" << format_g12(rep.slope_ratio_lin)
        << " holds=" << yesno(rep.slope_holds_lin) << "\n";
    out << "sampled gains: gamma_v=[" << format_g12(rep.gamma_v(0)) << ", "
        << format_g12(rep.gamma_v(1)) << "] gamma_c=["
        << format_g12(rep.gamma_c(0)) << ", " << format_g12(rep.gamma_c(1))
        << "]\n";
    out << "simulator cross-check: verdict=" << to_string(probe.verdict)
        << " rate=" << format_g12(probe.measured_rate) << "\n";

    // analyze.csv: one header, one row, fixed column order
    std::string csv = csv_row(
        {"switch_time_d", "duty", "x0_iL", "x0_vC", "eig1_re", "eig1_im",
         "eig2_re", "eig2_im", "spectral_radius", "det_phi", "nc_lhs",
         "nc_rhs", "nc_log_margin", "nc_holds", "slope_ratio_inst",
         "slope_holds_inst", "slope_ratio_lin", "slope_holds_lin", "gamma_v_iL",
         "gamma_v_vC", "gamma_c_iL", "gamma_c_vC", "verdict_exact",
         "sim_verdict", "sim_rate"});
    csv += csv_row({format_g12(orbit.switch_time_d),
                    format_g12(orbit.switch_time_d / model.period_T),
                    format_g12(orbit.x0(0)), format_g12(orbit.x0(1)),
                    format_g12(rep.eigenvalues(0).real()),
                    format_g12(rep.eigenvalues(0).imag()),
                    format_g12(rep.eigenvalues(1).real()),
                    format_g12(rep.eigenvalues(1).imag()),
                    format_g12(rep.spectral_radius), format_g12(rep.det_phi),
                    format_g12(rep.nc_lhs), format_g12(rep.nc_rhs),
                    format_g12(rep.nc_log_margin), yesno(rep.nc_holds),
                    format_g12(rep.slope_ratio_inst), yesno(rep.slope_holds_inst),
                    format_g12(rep.slope_ratio_lin), yesno(rep.slope_holds_lin),
                    format_g12(rep.gamma_v(0)), format_g12(rep.gamma_v(1)),
                    format_g12(rep.gamma_c(0)), format_g12(rep.gamma_c(1)),
                    to_string(rep.verdict_exact), to_string(probe.verdict),
                    format_g12(probe.measured_rate)});
    write_file(join_path(cfg.output.dir, "analyze.csv"), csv);

    if (rep.verdict_exact == Verdict::marginal) {
        out << "verdict: marginal\n";
        return exit_marginal;
    }
    if (rep.verdict_exact == Verdict::stable) {
        if (probe.verdict == StabilityProbe::Verdict::decaying) {
            out << "verdict: stable\n";
            return exit_ok;
        }
        out << "verdict: inconclusive (exact test stable, simulator "
            << to_string(probe.verdict) << ")\n";
        return exit_marginal;
    }
    if (probe.verdict == StabilityProbe::Verdict::growing ||
        probe.verdict == StabilityProbe::Verdict::period2) {
        out << "verdict: unstable\n";
        return exit_unstable;
    }
    out << "verdict: inconclusive (exact test unstable, simulator "
        << to_string(probe.verdict) << ")\n";
    return exit_marginal;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.sweep) {
        err << "error: sweep command requires a sweep section in the config\n";
        return exit_usage;
    }
    const SweepOutcome outcome = run_sweep(cfg);
    const std::string pname = sweep_param_name(cfg.sweep->param);

    std::string csv = csv_row(
        {"param", "value", "status", "switch_time_d", "duty",
         "spectral_radius", "det_phi", "nc_lhs", "nc_rhs",
         "nc_log_margin", "nc_holds", "slope_ratio_inst", "slope_holds_inst",
         "slope_ratio_lin", "slope_holds_lin", "verdict_exact", "sim_verdict",
         "sim_rate"});
    for (const SweepRow& r : outcome.rows) {
        csv += csv_row({pname, format_g12(r.value), r.status,
                        format_g12(r.switch_time_d), format_g12(r.duty),
                        format_g12(r.spectral_radius), format_g12(r.det_phi),
                        format_g12(r.nc_lhs), format_g12(r.nc_rhs),
                        format_g12(r.nc_log_margin), yesno(r.nc_holds),
                        format_g12(r.slope_ratio_inst), yesno(r.slope_holds_inst),
                        format_g12(r.slope_ratio_lin), yesno(r.slope_holds_lin),
                        r.verdict_exact, r.sim_verdict,
                        format_g12(r.sim_rate)});
    }
    write_file(join_path(cfg.output.dir, "sweep.csv"), csv);

    std::string bcsv = csv_row({"criterion", "found", "value"});
    for (const SweepBoundary& b : outcome.boundaries)
        bcsv += csv_row({b.criterion, yesno(b.found),
                         b.found ? format_g12(b.value) : "absent"});
    write_file(join_path(cfg.output.dir, "boundaries.csv"), bcsv);

    if (cfg.output.format == "csv+svg") {
        SvgPlot plot("stability criteria vs " + pname, pname);
        std::vector<double> xs, rho, nc_margin, slope_inst, slope_lin;
        for (const SweepRow& r : outcome.rows) {
            xs.push_back(r.value);
            rho.push_back(r.spectral_radius);
            nc_margin.push_back(r.nc_log_margin);
            slope_inst.push_back(r.slope_ratio_inst);
            slope_lin.push_back(r.slope_ratio_lin);
        }
        plot.add_series("spectral radius", xs, rho);
        plot.add_series("nc log margin", xs, nc_margin);
        plot.add_series("slope ratio (inst)", xs, slope_inst);
        plot.add_series("slope ratio (lin)", xs, slope_lin);
        for (const SweepBoundary& b : outcome.boundaries)
            if (b.found) plot.add_vertical_marker(b.criterion, b.value);
        write_file(join_path(cfg.output.dir, "sweep.svg"), plot.render());
    }

    out << describe(cfg);
    out << "sweep: " << pname << " in [" << format_g12(cfg.sweep->lo) << ", "
        << format_g12(cfg.sweep->hi) << "], " << outcome.rows.size()
        << " points\n";
    for (const SweepBoundary& b : outcome.boundaries) {
        out << "boundary " << b.criterion << ": ";
        if (b.found)
            out << format_g12(b.value) << "\n";
        else
            out << "absent in range\n";
    }
    return exit_ok;
}

int cmd_simulate(const RunConfig& cfg, int cycles, std::ostream& out) {
    const PiecewiseAffineModel model = build_converter(cfg.converter);
    const SwitchingRule rule = cfg.make_rule();
    OrbitOptions oopts;
    oopts.tol = cfg.solver.orbit_tol;
    SimOptions sopts;
    sopts.event_tol_rel = cfg.solver.event_tol_rel;

    // Start on the solved orbit when it exists and is not repelling;
    // otherwise from the averaged-model state so trajectories settle onto
    // the actual attractor (period-2 past a flip).
    Vec x;
    std::string start_kind;
    try {
        const PeriodicOrbit orbit = find_periodic_orbit(model, rule, {}, oopts);
        const ExactStability ex =
            exact_stability(compute_jacobian(orbit, model, rule));
        if (ex.verdict == Verdict::unstable) {
            x = averaged_guess(model, rule).x0;
            start_kind = "averaged (orbit unstable)";
        } else {
            x = orbit.x0;
            start_kind = "orbit";
        }
    } catch (const Error& e) {
        x = averaged_guess(model, rule).x0;
        start_kind = std::string("averaged (") + e.what() + ")";
    }

    const CycleSimulator sim(model, rule, sopts);
    const double T = model.period_T;
    constexpr int kWavePoints = 128;

    std::string samples =
        csv_row({"cycle", "iL", "vC", "pulse_count", "saturated",
                 "first_switch_time"});
    std::string wave = csv_row({"t", "iL", "vC", "v_out", "threshold"});

    for (int c = 0; c < cycles; ++c) {
        const auto [states, res] = sim.sample_cycle(x, kWavePoints);
        samples += csv_row(
            {std::to_string(c), format_g12(x(0)), format_g12(x(1)),
             std::to_string(res.pulse_count), yesno(res.saturated),
             res.switch_times.empty() ? "none"
                                      : format_g12(res.switch_times.front())});
        for (int j = 0; j < kWavePoints; ++j) {
            const double local_t = T * j / kWavePoints;
            const double t = c * T + local_t;
            const Vec& s = states[j];
            wave += csv_row({format_g12(t), format_g12(s(0)),
                             format_g12(s(1)),
                             format_g12(model.output_E.dot(s)),
                             format_g12(ramp_value(rule, local_t))});
        }
        x = res.end_state;
    }
    // closing row so one cycle has equal start and end samples
    samples += csv_row({std::to_string(cycles), format_g12(x(0)),
                        format_g12(x(1)), "", "", ""});

    write_file(join_path(cfg.output.dir, "samples.csv"), samples);
    write_file(join_path(cfg.output.dir, "waveform.csv"), wave);

    out << describe(cfg);
    out << "simulate: " << cycles << " cycles from " << start_kind
        << " start\n";
    return exit_ok;
}

int cmd_verify(const std::optional<RunConfig>& cfg, double tol_scale,
               std::ostream& out) {
    const VerifySummary summary = run_verification(cfg, tol_scale);
    for (const CheckResult& c : summary.checks) {
        out << (c.pass ? "PASS" : "FAIL") << " " << c.check << " config="
            << c.config << " residual=" << format_g12(c.residual)
            << " tol=" << format_g12(c.tol) << "\n";
    }
    size_t passed = 0;
    for (const CheckResult& c : summary.checks)
        if (c.pass) ++passed;
    out << "verify: " << passed << "/" << summary.checks.size()
        << " checks passed\n";
    return summary.all_pass ? exit_ok : exit_verify_failure;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"sampled-data stability analysis for PWM DC-DC converters "
                 "under current-mode control"};
    app.require_subcommand(1);

    std::string config_path, out_dir, format;
    int cycles = 1;
    double tol_scale = 1.0;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        if (needs_config)
            cmd->add_option("config", config_path, "config document")
                ->required();
        cmd->add_option("--out-dir", out_dir, "output directory override");
        cmd->add_option("--format", format, "csv | csv+svg");
    };

    CLI::App* analyze = app.add_subcommand(
        "analyze", "solve the orbit and evaluate all three criteria");
    add_common(analyze);
    CLI::App* sweep = app.add_subcommand(
        "sweep", "evaluate the criteria across a parameter grid");
    add_common(sweep);
    CLI::App* simulate =
        app.add_subcommand("simulate", "dump cycle samples and waveforms");
    add_common(simulate);
    simulate->add_option("--cycles", cycles, "number of cycles")->required();
    CLI::App* verify = app.add_subcommand(
        "verify", "run the oracle cross-check suite on the corpus");
    verify->add_option("config", config_path,
                       "optional config to include in the checks");
    verify->add_option("--tol-scale", tol_scale,
                       "scale every verification tolerance");

    std::vector<const char*> argv;
    argv.push_back("pwmstab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    }

    try {
        auto load = [&]() {
            RunConfig cfg = load_config_file(config_path);
            if (!out_dir.empty()) cfg.output.dir = out_dir;
            if (!format.empty()) cfg.output.format = format;
            cfg.validate();
            return cfg;
        };

        if (analyze->parsed()) return cmd_analyze(load(), out, err);
        if (sweep->parsed()) return cmd_sweep(load(), out, err);
        if (simulate->parsed()) {
            if (cycles < 1) {
                err << "error: --cycles must be at least 1\n";
                return exit_usage;
            }
            return cmd_simulate(load(), cycles, out);
        }
        if (verify->parsed()) {
            std::optional<RunConfig> cfg;
            if (!config_path.empty()) cfg = load_config_file(config_path);
            if (!(tol_scale > 0.0)) {
                err << "error: --tol-scale must be positive\n";
                return exit_usage;
            }
            return cmd_verify(cfg, tol_scale, out);
        }
    } catch (const ParseError& e) {
        err << "config parse error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_usage;
    } catch (const OrbitNotFoundError& e) {
        err << "solver failure: " << e.what() << "\n";
        return exit_solver_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_solver_failure;
    }
    return exit_usage;
}

} // namespace pwmstab
