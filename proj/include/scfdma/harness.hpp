// harness.hpp - Monte Carlo driver: trials, Pd estimation, sweeps, CAF profiles
//
// A trial is generate_frame -> apply_channel_chain -> detect. Per-trial seeds
// come from derive_seed(master, stage, trial), so a trial's outcome depends
// only on (scenario, config, trial index, master seed) and never on which
// worker ran it or in what order.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "scfdma/caf_estimation.hpp"
#include "scfdma/caf_theory.hpp"
#include "scfdma/channel.hpp"
#include "scfdma/detector.hpp"
#include "scfdma/rng.hpp"
#include "scfdma/types.hpp"
#include "scfdma/waveform.hpp"

namespace scfdma {

enum class Hypothesis { H0, H1 };

inline constexpr std::size_t kDefaultTrials = 300;

/// The received record of one trial, before detection.
inline ComplexStream trial_record(const Scenario& scenario, const SignalConfig& config,
                                  std::uint64_t trial, std::uint64_t master_seed, Hypothesis h) {
    config.validate();
    scenario.validate();
    const std::size_t U = samples_for_duration(config, scenario.observation_s);
    if (U < minimum_record(config)) throw ConfigError("observation too short for the detector");
    if (h == Hypothesis::H0) return apply_channel_chain(nullptr, U, scenario, config, master_seed, trial);
    const auto tx = generate_frame(config, scenario.observation_s, derive_seed(master_seed, "frame", trial));
    return apply_channel_chain(&tx, U, scenario, config, master_seed, trial);
}

inline TestResult trial_statistics(const Scenario& scenario, const SignalConfig& config,
                                   std::uint64_t trial, std::uint64_t master_seed,
                                   Hypothesis h = Hypothesis::H1, const DetectorOptions& options = {}) {
    const auto r = trial_record(scenario, config, trial, master_seed, h);
    return detect(r, config, scenario.p_fa, options);
}

/// True when the detector declares the signal present.
inline bool run_trial(const Scenario& scenario, const SignalConfig& config, std::uint64_t trial,
                      std::uint64_t master_seed, Hypothesis h = Hypothesis::H1,
                      const DetectorOptions& options = {}) {
    return trial_statistics(scenario, config, trial, master_seed, h, options).decision == Decision::H1_present;
}

inline std::size_t default_workers() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Evaluates fn(i) for i in [0, count) on up to `workers` threads and returns
/// the results in index order. The first exception thrown is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn fn) {
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(count);
    workers = std::clamp<std::size_t>(workers == 0 ? default_workers() : workers, 1, std::max<std::size_t>(count, 1));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
    if (n == 0) throw ConfigError("wilson_interval: n must be >= 1");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct MonteCarloResult {
    double pd = 0.0;
    std::size_t detections = 0;
    std::size_t trials = 0;
    Interval ci95;
    Scenario scenario;
    double elapsed_s = 0.0;
};

struct RunOptions {
    std::size_t workers = 0;  ///< 0: hardware concurrency
    Hypothesis hypothesis = Hypothesis::H1;
    DetectorOptions detector;
    std::uint64_t first_trial = 0;
};

/// Fraction of trials declared H1. Under Hypothesis::H0 this is the
/// empirical false-alarm rate.
inline MonteCarloResult estimate_pd(const Scenario& scenario, const SignalConfig& config,
                                    std::size_t trials, std::uint64_t master_seed,
                                    const RunOptions& options = {}) {
    if (trials < 1) throw ConfigError("estimate_pd: trials must be >= 1");
    const auto start = std::chrono::steady_clock::now();
    const auto hits = parallel_map(trials, options.workers, [&](std::size_t i) {
        return run_trial(scenario, config, options.first_trial + i, master_seed, options.hypothesis,
                         options.detector)
                   ? 1
                   : 0;
    });
    MonteCarloResult out;
    for (int h : hits) out.detections += static_cast<std::size_t>(h);
    out.trials = trials;
    out.pd = static_cast<double>(out.detections) / static_cast<double>(trials);
    out.ci95 = wilson_interval(out.detections, trials);
    out.scenario = scenario;
    out.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

inline std::vector<TestResult> collect_statistics(const Scenario& scenario, const SignalConfig& config,
                                                  std::size_t trials, std::uint64_t master_seed,
                                                  const RunOptions& options = {}) {
    if (trials < 1) throw ConfigError("collect_statistics: trials must be >= 1");
    return parallel_map(trials, options.workers, [&](std::size_t i) {
        return trial_statistics(scenario, config, options.first_trial + i, master_seed, options.hypothesis,
                                options.detector);
    });
}

// ---------------------------------------------------------------------------
// False-alarm calibration

/// Chi-square CDF with `dof` degrees of freedom.
inline double chi2_cdf(double x, double dof) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(dof / 2.0, x / 2.0);
}

/// One-sample Kolmogorov-Smirnov statistic of `samples` against chi-square(dof).
inline double ks_statistic(std::vector<double> samples, double dof) {
    if (samples.empty()) throw ConfigError("ks_statistic: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = chi2_cdf(samples[i], dof);
        d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return d;
}

/// Asymptotic KS p-value Q_KS(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2)
/// with lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double ks_pvalue(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0, sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw ConfigError("pearson_correlation: need matched samples");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

struct CalibrationReport {
    std::size_t trials = 0;
    std::size_t false_alarms = 0;
    double pfa_target = 0.0;
    double pfa_empirical = 0.0;
    Interval ci95;
    double ks_d = 0.0;
    double ks_p = 0.0;
    double psi_correlation = 0.0;
    double gamma = 0.0;
    std::vector<TestResult> results;
};

/// Noise-only runs through the full chain: empirical false-alarm rate, KS fit
/// of Upsilon to chi-square(4) and the Psi1/Psi2 correlation.
inline CalibrationReport calibrate_pfa(const Scenario& scenario, const SignalConfig& config,
                                       std::size_t trials, std::uint64_t master_seed,
                                       std::size_t workers = 0) {
    RunOptions opts;
    opts.workers = workers;
    opts.hypothesis = Hypothesis::H0;
    CalibrationReport rep;
    rep.results = collect_statistics(scenario, config, trials, master_seed, opts);
    std::vector<double> ups, p1, p2;
    for (const auto& t : rep.results) {
        ups.push_back(t.upsilon);
        p1.push_back(t.psi1);
        p2.push_back(t.psi2);
        if (t.decision == Decision::H1_present) ++rep.false_alarms;
    }
    rep.trials = trials;
    rep.pfa_target = scenario.p_fa;
    rep.pfa_empirical = static_cast<double>(rep.false_alarms) / static_cast<double>(trials);
    rep.ci95 = wilson_interval(rep.false_alarms, trials);
    rep.ks_d = ks_statistic(ups, 4.0);
    rep.ks_p = ks_pvalue(rep.ks_d, trials);
    rep.psi_correlation = trials >= 2 ? pearson_correlation(p1, p2) : 0.0;
    rep.gamma = threshold(scenario.p_fa);
    return rep;
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { Snr, Pfa, Observation, Sir, Rho, Bits };

inline SweepAxis parse_axis(std::string_view name) {
    if (name == "snr") return SweepAxis::Snr;
    if (name == "pfa") return SweepAxis::Pfa;
    if (name == "observation") return SweepAxis::Observation;
    if (name == "sir") return SweepAxis::Sir;
    if (name == "rho") return SweepAxis::Rho;
    if (name == "bits") return SweepAxis::Bits;
    throw ConfigError("unknown sweep axis: " + std::string(name));
}

inline std::string_view to_string(SweepAxis a) {
    switch (a) {
    case SweepAxis::Snr: return "snr";
    case SweepAxis::Pfa: return "pfa";
    case SweepAxis::Observation: return "observation";
    case SweepAxis::Sir: return "sir";
    case SweepAxis::Rho: return "rho";
    case SweepAxis::Bits: return "bits";
    }
    return "?";
}

struct SweepSpec {
    SweepAxis axis = SweepAxis::Snr;
    std::vector<double> values;
    Scenario base;
    SignalConfig config;
    std::size_t trials = kDefaultTrials;
    std::uint64_t seed = 1;
    RunOptions run;
};

struct SweepRow {
    double axis_value = 0.0;
    MonteCarloResult result;
};

/// Scenario and config for one axis value.
inline void apply_axis(SweepAxis axis, double v, Scenario& s, SignalConfig& c) {
    auto as_int = [v](const char* what) {
        if (v != std::round(v)) throw ConfigError(std::string(what) + " sweep values must be integers");
        return static_cast<int>(v);
    };
    switch (axis) {
    case SweepAxis::Snr: s.snr_db = v; break;
    case SweepAxis::Pfa: s.p_fa = v; break;
    case SweepAxis::Observation: s.observation_s = v; break;
    case SweepAxis::Sir: s.sir_db = v; break;
    case SweepAxis::Rho: c.rho = as_int("rho"); break;
    case SweepAxis::Bits: s.quantizer_bits = as_int("bits"); break;
    }
    s.validate();
    c.validate();
}

/// One Monte Carlo point per axis value, every point on the same trial seeds.
inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw ConfigError("sweep: no axis values");
    if (spec.trials < 1) throw ConfigError("sweep: trials must be >= 1");
    std::vector<SweepRow> rows;
    for (double v : spec.values) {
        Scenario s = spec.base;
        SignalConfig c = spec.config;
        apply_axis(spec.axis, v, s, c);
        rows.push_back({v, estimate_pd(s, c, spec.trials, spec.seed, spec.run)});
    }
    return rows;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, std::uint64_t seed) {
    std::ostringstream os;
    os << "axis_value,pd,ci_lo,ci_hi,trials,seed\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%zu,%llu\n", format_number(r.axis_value).c_str(),
                      r.result.pd, r.result.ci95.lo, r.result.ci95.hi, r.result.trials,
                      static_cast<unsigned long long>(seed));
        os << buf;
    }
    return os.str();
}

/// lo, lo+step, ... up to hi inclusive (with a small tolerance).
inline std::vector<double> linear_range(double lo, double step, double hi) {
    if (!(step > 0.0) || hi < lo) throw ConfigError("range: need step > 0 and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
}

// ---------------------------------------------------------------------------
// CAF profiles

enum class ProfileMode { DelayScanAtCf, CfScanAtDelay };

inline ProfileMode parse_profile_mode(std::string_view name) {
    if (name == "delay" || name == "delay_scan_at_cf") return ProfileMode::DelayScanAtCf;
    if (name == "cf" || name == "cf_scan_at_delay") return ProfileMode::CfScanAtDelay;
    throw ConfigError("unknown caf profile mode: " + std::string(name));
}

struct ProfileRow {
    double query = 0.0;
    double estimate = 0.0;  ///< |c_hat|
    double theory = 0.0;    ///< |closed form|
};

/// |c_hat| and |theory| along a delay scan at fixed CF or a CF scan at fixed
/// delay, from one noise-free record of `observation_s`.
inline std::vector<ProfileRow> caf_profile(const SignalConfig& config, ProfileMode mode, double fixed,
                                           const std::vector<double>& queries, double observation_s,
                                           std::uint64_t seed, std::size_t workers = 0) {
    if (queries.empty()) throw ConfigError("caf_profile: empty query range");
    const auto r = generate_frame(config, observation_s, derive_seed(seed, "frame", 0));
    const CafTheory theory(config);
    return parallel_map(queries.size(), workers, [&](std::size_t i) {
        const CafQuery q = mode == ProfileMode::DelayScanAtCf ? CafQuery{fixed, queries[i]}
                                                              : CafQuery{queries[i], fixed};
        return ProfileRow{queries[i], std::abs(estimate_caf(r, q).value), std::abs(theory(q).value)};
    });
}

inline std::string profile_csv(const std::vector<ProfileRow>& rows) {
    std::ostringstream os;
    os << "query,abs_estimate,abs_theory\n";
    for (const auto& row : rows) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s,%.9e,%.9e\n", format_number(row.query).c_str(), row.estimate,
                      row.theory);
        os << buf;
    }
    return os.str();
}

}  // namespace scfdma
