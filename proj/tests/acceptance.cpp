// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "scfdma/caf_estimation.hpp"
#include "scfdma/caf_theory.hpp"
#include "scfdma/detector.hpp"
#include "scfdma/harness.hpp"
#include "scfdma/waveform.hpp"

using namespace scfdma;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(cd a, cd b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Scenario scenario(ChannelProfile p, double snr_db, double p_fa) {
    Scenario s;
    s.profile = p;
    s.snr_db = snr_db;
    s.p_fa = p_fa;
    return s;
}

// --------------------------------------------------------------------------

Outcome generator_oracle() {
    SignalConfig c;
    c.N = 64;
    c.M = 128;
    const auto blocks = map_symbols(2024, 200, c);
    double worst = 0.0;
    for (const auto& b : blocks) {
        const auto a = lfdma_block_dft(b, c);
        const auto z = lfdma_block_closed_form(b, c);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num = std::max(num, std::abs(a[i] - z[i]));
            den = std::max(den, std::abs(a[i]));
        }
        worst = std::max(worst, num / den);
    }
    return {worst <= 1e-9, fmt("max relative error %.3e over 200 blocks", worst)};
}

Outcome proof_identity() {
    Rng rng(7);
    double worst = 0.0;
    for (int N : {2, 8, 72, 128})
        for (int i = 0; i < 5; ++i) {
            const int n = static_cast<int>(rng.below(1000)) - 500;
            const double target = 0.5 * N * N;
            worst = std::max(worst, std::abs(n_squared_identity_check(N, n) - target) / target);
        }
    return {worst <= 1e-9, fmt("max relative deviation %.3e", worst)};
}

// Integer expansion M/N = 2 is where the closed form is exact.
Outcome theory_vs_estimate() {
    SignalConfig c;
    c.N = 64;
    c.M = 128;
    const auto r = generate_frame(c, 20e-3, derive_seed(3, "frame", 0));
    const CafTheory th(c);

    double best = 0.0, peak_tau = -1.0;
    for (int t = 20; t <= 700; ++t) {
        const double v = std::abs(estimate_caf(r, {0.0, static_cast<double>(t)}).value);
        if (v > best) best = v, peak_tau = t;
    }
    const bool delay_ok = std::abs(peak_tau - 512.0) <= c.rho;

    std::vector<std::pair<double, double>> cf;
    for (int k = -320; k <= 320; ++k) {
        const double b = k / 640.0;
        if (std::abs(b) < 0.01) continue;
        cf.emplace_back(std::abs(estimate_caf(r, {b, 0.0}).value), b);
    }
    std::sort(cf.rbegin(), cf.rend());
    const bool cf_ok = std::abs(cf[0].second) == 0.25 && cf[1].second == -cf[0].second;

    const std::vector<CafQuery> peaks = {{0.0, 0.0}, {0.0, 512.0}, {0.25, 0.0}, {-0.25, 0.0}};
    std::vector<double> est, theo;
    double se = 0.0, st = 0.0;
    for (const auto& q : peaks) {
        est.push_back(std::abs(estimate_caf(r, q).value));
        theo.push_back(std::abs(th(q).value));
        se += est.back();
        st += theo.back();
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        worst = std::max(worst, std::abs(est[i] / se - theo[i] / st) / (theo[i] / st));
    return {delay_ok && cf_ok && worst <= 0.10,
            fmt("delay peak %.0f, CF peaks %+.4f/%+.4f, worst normalized magnitude error %.2f%%", peak_tau,
                cf[0].second, cf[1].second, 100.0 * worst)};
}

Outcome boundary_continuity() {
    double worst = 0.0;
    for (auto [N, M] : {std::pair{8, 16}, std::pair{72, 144}}) {
        const LagModel m{N, M, M / 4, 1.0};
        for (long long mu = 0; mu + 1 <= M + m.L; ++mu) {
            const cd left = m.interval(mu, 1.0).coefficient;
            worst = std::max(worst, rel(left, m.interval(mu + 1, 0.0).coefficient));
            worst = std::max(worst, rel(left, m.at_lattice(mu + 1).coefficient));
        }
    }
    return {worst <= 1e-12, fmt("max relative jump %.3e", worst)};
}

Outcome h0_calibration() {
    SignalConfig c;
    Scenario s = scenario(ChannelProfile::pedestrian_a(), 0.0, 0.01);
    const auto rep = calibrate_pfa(s, c, 2000, 5);
    const bool ok = rep.pfa_empirical >= 0.004 && rep.pfa_empirical <= 0.02 && rep.ks_p > 0.01;
    return {ok, fmt("pfa %.4f (%zu/2000), KS D %.4f p %.3f", rep.pfa_empirical, rep.false_alarms, rep.ks_d,
                    rep.ks_p)};
}

Outcome pd_point(const Scenario& s, const SignalConfig& c, std::size_t trials, double floor, std::uint64_t seed) {
    const auto r = estimate_pd(s, c, trials, seed);
    return {r.pd >= floor, fmt("Pd %.3f (%zu/%zu, CI %.3f-%.3f) need >= %.2f", r.pd, r.detections, r.trials,
                               r.ci95.lo, r.ci95.hi, floor)};
}

Outcome join(const Outcome& a, const Outcome& b) { return {a.pass && b.pass, a.detail + "; " + b.detail}; }

Outcome pedestrian_anchor() {
    SignalConfig c;
    const auto a = pd_point(scenario(ChannelProfile::pedestrian_a(), -10.0, 0.1), c, 300, 0.95, 61);
    const auto b = pd_point(scenario(ChannelProfile::pedestrian_a(), -15.0, 0.35), c, 300, 0.90, 62);
    return join(a, b);
}

Outcome vehicular_anchor() {
    SignalConfig c;
    const auto a = pd_point(scenario(ChannelProfile::vehicular_a(), -6.0, 0.01), c, 300, 0.95, 71);
    auto s = scenario(ChannelProfile::vehicular_a(), -12.0, 0.01);
    s.observation_s = 128e-3;
    const auto b = pd_point(s, c, 100, 0.9, 72);
    return join(a, {b.pass, "128 ms -12 dB " + b.detail});
}

Outcome interference_anchor() {
    SignalConfig c;
    auto s0 = scenario(ChannelProfile::pedestrian_a(), -7.0, 0.01);
    s0.sir_db = 0.0;
    auto s5 = scenario(ChannelProfile::pedestrian_a(), -5.0, 0.01);
    s5.sir_db = -5.0;
    const auto a = pd_point(s0, c, 300, 0.95, 81);
    const auto b = pd_point(s5, c, 300, 0.95, 82);
    return join({a.pass, "SIR 0 dB at -7 dB " + a.detail}, {b.pass, "SIR -5 dB at -5 dB " + b.detail});
}

Outcome quantization_anchor() {
    SignalConfig c;
    double worst = 0.0;
    std::string detail;
    for (double snr : {-12.0, -9.0, -6.0}) {
        auto s = scenario(ChannelProfile::pedestrian_a(), snr, 0.01);
        s.quantizer_bits = 16;
        const auto a = estimate_pd(s, c, 300, 91);
        s.quantizer_bits = 24;
        const auto b = estimate_pd(s, c, 300, 91);
        worst = std::max(worst, std::abs(a.pd - b.pd));
        detail += fmt("%g dB: %.3f vs %.3f; ", snr, a.pd, b.pd);
    }
    return {worst <= 0.03, detail + fmt("max |dPd| %.3f", worst)};
}

Outcome flop_formula() {
    const auto a = flop_count(64000, 384);
    const auto b = flop_count(32000, 192);
    const bool ok = std::llabs(a - 11'645'343) <= 20 && std::llabs(b - 5'502'692) <= 20;
    return {ok, fmt("%lld and %lld", static_cast<long long>(a), static_cast<long long>(b))};
}

Outcome property_suites() {
    SignalConfig c;
    std::string detail;
    bool ok = true;

    // Every transmitted CP equals the tail of its block, long and short CP.
    bool cp_ok = true;
    for (CpMode mode : {CpMode::Long, CpMode::Short}) {
        SignalConfig cc = c;
        cc.cp_mode = mode;
        const auto fs = generate_symbol_stream(cc, 14, 17);
        std::size_t start = 0;
        for (std::size_t b = 0; b < 14; ++b) {
            const int L = cc.cp_length(b);
            for (int i = 0; i < L; ++i)
                cp_ok &= fs.symbols[start + static_cast<std::size_t>(i)] ==
                         fs.symbols[start + static_cast<std::size_t>(cc.M + i)];
            start += static_cast<std::size_t>(cc.M + L);
        }
    }
    ok &= cp_ok;
    detail += cp_ok ? "CP equality ok" : "CP equality BROKEN";

    // Decision and statistics unchanged under r -> a r.
    bool scale_ok = true;
    const auto s = scenario(ChannelProfile::pedestrian_a(), -12.0, 0.01);
    Rng rng(101);
    for (std::uint64_t t = 0; t < 4; ++t) {
        const auto r = trial_record(s, c, t, 111, Hypothesis::H1);
        const auto base = detect(r, c, s.p_fa);
        for (int i = 0; i < 10; ++i) {
            const cd a = std::polar(std::exp(rng.uniform(-6.0, 6.0)), rng.uniform(-kPi, kPi));
            ComplexStream x = r;
            for (auto& v : x.samples) v *= a;
            const auto t2 = detect(x, c, s.p_fa);
            scale_ok &= t2.decision == base.decision && std::abs(t2.upsilon / base.upsilon - 1.0) < 1e-9;
        }
    }
    ok &= scale_ok;
    detail += scale_ok ? ", scale invariance ok" : ", scale invariance BROKEN";

    // Pd non-decreasing in SNR over AWGN, and a full sweep replays byte for byte.
    SweepSpec spec;
    spec.axis = SweepAxis::Snr;
    spec.values = linear_range(-24.0, 2.0, -12.0);
    spec.trials = 100;
    spec.seed = 121;
    const auto rows = sweep(spec);
    bool mono = true;
    std::string pds;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) mono &= rows[i].result.pd >= rows[i - 1].result.pd;
        pds += fmt("%s%.2f", i ? "/" : "", rows[i].result.pd);
    }
    ok &= mono;
    detail += fmt(", AWGN Pd %s %s", pds.c_str(), mono ? "monotone" : "NOT monotone");

    const auto csv = sweep_csv(rows, spec.seed);
    spec.run.workers = 1;
    const bool replay = sweep_csv(sweep(spec), spec.seed) == csv;
    ok &= replay;
    detail += replay ? ", CSV replay identical" : ", CSV replay DIFFERS";
    return {ok, detail};
}

}  // namespace

int main() {
    std::printf("acceptance suite, %zu worker(s)\n", default_workers());
    criterion(1, "generator DFT vs closed form", generator_oracle);
    criterion(2, "sum identity N^2/2", proof_identity);
    criterion(3, "CAF theory vs estimate", theory_vs_estimate);
    criterion(4, "case boundary continuity", boundary_continuity);
    criterion(5, "H0 false-alarm calibration", h0_calibration);
    criterion(6, "Pedestrian A anchors", pedestrian_anchor);
    criterion(7, "Vehicular A anchors", vehicular_anchor);
    criterion(8, "interference anchors", interference_anchor);
    criterion(9, "16 vs 24 bit quantization", quantization_anchor);
    criterion(10, "flop formula", flop_formula);
    criterion(11, "property suites", property_suites);
    std::printf("%s: %d failure(s)\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
