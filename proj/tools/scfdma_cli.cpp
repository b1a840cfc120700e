// scfdma_cli - generate, analyse and detect LTE SC-FDMA signals
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "scfdma/caf_theory.hpp"
#include "scfdma/config.hpp"
#include "scfdma/harness.hpp"
#include "scfdma/iq_io.hpp"

using namespace scfdma;

namespace {

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    bool seed_set = false;
    std::size_t trials = kDefaultTrials;
    bool trials_set = false;
    std::string out;
    std::size_t workers = 0;
};

RunConfig load(const Globals& g) {
    RunConfig rc = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    rc.signal.validate();
    rc.scenario.validate();
    return rc;
}

std::uint64_t seed_of(const Globals& g, const RunConfig& rc) { return g.seed_set ? g.seed : rc.seed.value_or(g.seed); }

std::size_t trials_of(const Globals& g, const RunConfig& rc) {
    return g.trials_set ? g.trials : rc.trials.value_or(g.trials);
}

std::size_t workers_of(const Globals& g, const RunConfig& rc) {
    return g.workers != 0 ? g.workers : rc.workers.value_or(0);
}

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty() || g.out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(g.out);
    if (!f) throw ConfigError("cannot write output file: " + g.out);
    f << text;
}

std::string fmt(double v) { return format_number(v); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LTE SC-FDMA cyclostationarity toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "key=value configuration file");
    app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { g.seed = v, g.seed_set = true; },
                                           "master seed");
    app.add_option_function<std::size_t>("--trials", [&](std::size_t v) { g.trials = v, g.trials_set = true; },
                                         "Monte Carlo trials");
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_option("--workers", g.workers, "worker threads (0 = all cores)");

    // generate
    auto* gen = app.add_subcommand("generate", "write an IQ record (cf32 + .meta sidecar)");
    bool gen_clean = false, gen_h0 = false;
    std::uint64_t gen_trial = 0;
    gen->add_flag("--clean", gen_clean, "noise-free transmit signal, no channel");
    gen->add_flag("--h0", gen_h0, "noise/interference only");
    gen->add_option("--trial", gen_trial, "trial index for sub-seed derivation");

    // caf-theory
    auto* cth = app.add_subcommand("caf-theory", "closed-form CAF over a grid (CSV)");
    std::string th_betas = "0", th_taus = "0:1:700";
    cth->add_option("--beta", th_betas, "CF list a,b,c or range lo:step:hi (cycles/sample)");
    cth->add_option("--tau", th_taus, "delay list or range (samples)");

    // caf-profile
    auto* cpr = app.add_subcommand("caf-profile", "estimated vs theoretical |CAF| on a noise-free record (CSV)");
    std::string pr_mode = "delay", pr_range = "0:1:700";
    double pr_fixed = 0.0, pr_obs = 20e-3;
    cpr->add_option("--mode", pr_mode, "delay (scan delay at fixed CF) or cf (scan CF at fixed delay)");
    cpr->add_option("--fixed", pr_fixed, "the fixed CF or delay");
    cpr->add_option("--range", pr_range, "scan values: list or lo:step:hi");
    cpr->add_option("--observation", pr_obs, "record length, seconds");

    // detect
    auto* det = app.add_subcommand("detect", "run the two-feature test on an IQ file or a simulated record");
    std::string det_in;
    std::optional<double> det_pfa;
    det->add_option("--in", det_in, "cf32 IQ file (with .meta); default: simulate from the config");
    det->add_option("--pfa", det_pfa, "target false-alarm probability");

    // calibrate-pfa
    auto* cal = app.add_subcommand("calibrate-pfa", "noise-only false-alarm calibration");

    // sweep
    auto* swp = app.add_subcommand("sweep", "Pd over one scenario axis (CSV)");
    std::string sw_axis = "snr", sw_values = "-20:1:0";
    swp->add_option("--axis", sw_axis, "snr | pfa | observation | sir | rho | bits");
    swp->add_option("--values", sw_values, "axis values: list or lo:step:hi");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig rc = load(g);
        const std::uint64_t seed = seed_of(g, rc);
        const std::size_t workers = workers_of(g, rc);

        if (*gen) {
            if (g.out.empty() || g.out == "-") throw ConfigError("generate needs --out <file.cf32>");
            ComplexStream s;
            if (gen_clean)
                s = generate_frame(rc.signal, rc.scenario.observation_s, derive_seed(seed, "frame", gen_trial));
            else
                s = trial_record(rc.scenario, rc.signal, gen_trial, seed, gen_h0 ? Hypothesis::H0 : Hypothesis::H1);
            write_iq(g.out, s,
                     {{"seed", std::to_string(seed)},
                      {"trial", std::to_string(gen_trial)},
                      {"content", gen_clean ? "clean" : (gen_h0 ? "h0" : "h1")}});
            std::cout << "samples=" << s.size() << "\nsample_rate_hz=" << fmt(s.sample_rate_hz) << '\n';
        } else if (*cth) {
            const CafTheory th(rc.signal);
            std::string csv = "beta_norm,tau_samples,re,im,magnitude\n";
            for (double b : parse_values(th_betas))
                for (double t : parse_values(th_taus)) {
                    const cd v = th({b, t}).value;
                    char buf[192];
                    std::snprintf(buf, sizeof buf, "%s,%s,%.12e,%.12e,%.12e\n", fmt(b).c_str(), fmt(t).c_str(),
                                  v.real(), v.imag(), std::abs(v));
                    csv += buf;
                }
            emit(g, csv);
        } else if (*cpr) {
            const auto rows = caf_profile(rc.signal, parse_profile_mode(pr_mode), pr_fixed, parse_values(pr_range),
                                          pr_obs, seed, workers);
            emit(g, profile_csv(rows));
        } else if (*det) {
            const double p_fa = det_pfa.value_or(rc.scenario.p_fa);
            ComplexStream r = det_in.empty() ? trial_record(rc.scenario, rc.signal, 0, seed, Hypothesis::H1)
                                             : read_iq(det_in);
            const auto t = detect(r, rc.signal, p_fa, rc.detector);
            std::string text = "psi1=" + fmt(t.psi1) + "\npsi2=" + fmt(t.psi2) + "\nupsilon=" + fmt(t.upsilon) +
                               "\ngamma=" + fmt(t.gamma) + "\ndecision=" + std::string(to_string(t.decision)) +
                               "\nu_s=" + std::to_string(t.u_s) + "\n";
            emit(g, text);
        } else if (*cal) {
            const auto rep = calibrate_pfa(rc.scenario, rc.signal, trials_of(g, rc), seed, workers);
            std::string text = "trials=" + std::to_string(rep.trials) + "\npfa_target=" + fmt(rep.pfa_target) +
                               "\npfa_empirical=" + fmt(rep.pfa_empirical) + "\npfa_ci_lo=" + fmt(rep.ci95.lo) +
                               "\npfa_ci_hi=" + fmt(rep.ci95.hi) + "\ngamma=" + fmt(rep.gamma) +
                               "\nks_statistic=" + fmt(rep.ks_d) + "\nks_pvalue=" + fmt(rep.ks_p) +
                               "\npsi_correlation=" + fmt(rep.psi_correlation) + "\n";
            emit(g, text);
        } else if (*swp) {
            SweepSpec spec;
            spec.axis = parse_axis(sw_axis);
            spec.values = parse_values(sw_values);
            spec.base = rc.scenario;
            spec.config = rc.signal;
            spec.trials = trials_of(g, rc);
            spec.seed = seed;
            spec.run.workers = workers;
            spec.run.detector = rc.detector;
            emit(g, sweep_csv(sweep(spec), seed));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
