#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "scfdma/harness.hpp"

using namespace scfdma;

namespace {

Scenario awgn(double snr_db, double p_fa = 0.01) {
    Scenario s;
    s.snr_db = snr_db;
    s.p_fa = p_fa;
    return s;
}

bool ci_overlap(const MonteCarloResult& a, const MonteCarloResult& b) {
    return a.ci95.lo <= b.ci95.hi && b.ci95.lo <= a.ci95.hi;
}

}  // namespace

TEST(Wilson, KnownInterval) {
    const auto i = wilson_interval(50, 100);
    EXPECT_NEAR(i.lo, 0.4038, 1e-4);
    EXPECT_NEAR(i.hi, 0.5962, 1e-4);
    const auto z = wilson_interval(0, 30);
    EXPECT_EQ(z.lo, 0.0);
    EXPECT_GT(z.hi, 0.0);
    const auto f = wilson_interval(30, 30);
    EXPECT_LT(f.lo, 1.0);
    EXPECT_NEAR(f.hi, 1.0, 1e-12);
    EXPECT_THROW(wilson_interval(0, 0), ConfigError);
}

TEST(Ks, StatisticAndPValue) {
    // Exact chi-square(4) quantiles at (i + 0.5)/n give D = 0.5/n.
    std::vector<double> q;
    const int n = 200;
    for (int i = 0; i < n; ++i) q.push_back(2.0 * boost::math::gamma_p_inv(2.0, (i + 0.5) / n));
    EXPECT_NEAR(ks_statistic(q, 4.0), 0.5 / n, 1e-9);
    EXPECT_NEAR(ks_pvalue(1.358 / std::sqrt(1e6), 1'000'000), 0.05, 2e-3);
    EXPECT_NEAR(ks_pvalue(0.0, 100), 1.0, 1e-12);
    EXPECT_LT(ks_pvalue(0.5, 100), 1e-9);
}

TEST(RunTrial, DeterministicPerSeed) {
    SignalConfig c;
    const auto s = awgn(-18.0);
    for (std::uint64_t t = 0; t < 3; ++t) {
        const auto a = trial_statistics(s, c, t, 42);
        const auto b = trial_statistics(s, c, t, 42);
        EXPECT_EQ(a.upsilon, b.upsilon);
        EXPECT_EQ(run_trial(s, c, t, 42), a.decision == Decision::H1_present);
    }
}

TEST(RunTrial, HighSnrAlwaysDetected) {
    SignalConfig c;
    const auto r = estimate_pd(awgn(20.0), c, 100, 3);
    EXPECT_EQ(r.detections, 100u);
    EXPECT_EQ(r.pd, 1.0);
}

TEST(RunTrial, RejectsTooShortObservation) {
    SignalConfig c;
    auto s = awgn(0.0);
    s.observation_s = 50e-6;
    EXPECT_THROW(run_trial(s, c, 0, 1), ConfigError);
}

TEST(EstimatePd, ParallelMatchesSerial) {
    SignalConfig c;
    const auto s = awgn(-17.0);
    RunOptions serial, parallel;
    serial.workers = 1;
    parallel.workers = 3;
    const auto a = estimate_pd(s, c, 24, 8, serial);
    const auto b = estimate_pd(s, c, 24, 8, parallel);
    EXPECT_EQ(a.detections, b.detections);
    EXPECT_GE(a.pd, a.ci95.lo);
    EXPECT_LE(a.pd, a.ci95.hi);
    EXPECT_THROW(estimate_pd(s, c, 0, 8), ConfigError);
}

TEST(EstimatePd, DisjointSeedRangesAgree) {
    SignalConfig c;
    const auto s = awgn(-17.0);
    RunOptions first, second;
    second.first_trial = 10'000;
    const auto a = estimate_pd(s, c, 80, 5, first);
    const auto b = estimate_pd(s, c, 80, 5, second);
    EXPECT_TRUE(ci_overlap(a, b)) << a.pd << " vs " << b.pd;
}

TEST(ParallelMap, PropagatesExceptions) {
    EXPECT_THROW(parallel_map(10, 2,
                              [](std::size_t i) {
                                  if (i == 7) throw NumericalError("boom");
                                  return 1;
                              }),
                 NumericalError);
}

TEST(Sweep, AxisParsingAndErrors) {
    for (auto name : {"snr", "pfa", "observation", "sir", "rho", "bits"})
        EXPECT_EQ(to_string(parse_axis(name)), name);
    EXPECT_THROW(parse_axis("doppler"), ConfigError);
    SweepSpec spec;
    EXPECT_THROW(sweep(spec), ConfigError);
    spec.values = {1.5};
    spec.axis = SweepAxis::Bits;
    EXPECT_THROW(sweep(spec), ConfigError);
}

TEST(Sweep, CsvSchemaAndReplay) {
    SweepSpec spec;
    spec.axis = SweepAxis::Snr;
    spec.values = {-20.0, -16.0};
    spec.base = awgn(0.0);
    spec.trials = 10;
    spec.seed = 1234;
    const auto csv = sweep_csv(sweep(spec), spec.seed);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "axis_value,pd,ci_lo,ci_hi,trials,seed");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_NE(csv.find("\n-20,"), std::string::npos);
    EXPECT_NE(csv.find(",10,1234\n"), std::string::npos);
    spec.run.workers = 2;
    EXPECT_EQ(sweep_csv(sweep(spec), spec.seed), csv);
}

TEST(Sweep, MonotoneInSnr) {
    SweepSpec spec;
    spec.axis = SweepAxis::Snr;
    spec.values = {-24.0, -21.0, -18.0, -15.0, -12.0};
    spec.base = awgn(0.0);
    spec.trials = 60;
    const auto rows = sweep(spec);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_GE(rows[i].result.ci95.hi, rows[i - 1].result.ci95.lo) << rows[i].axis_value;
    EXPECT_LT(rows.front().result.pd, rows.back().result.pd);
}

TEST(Detector, MedianUpsilonGrowsWithSnr) {
    SignalConfig c;
    double previous = 0.0;
    for (double snr : {-20.0, -15.0, -10.0, -5.0, 0.0}) {
        auto stats = collect_statistics(awgn(snr), c, 100, 17);
        std::vector<double> u;
        for (const auto& t : stats) u.push_back(t.upsilon);
        std::nth_element(u.begin(), u.begin() + 50, u.end());
        EXPECT_GE(u[50], previous) << snr;
        previous = u[50];
    }
}

TEST(Sweep, LongCpBeatsShortCp) {
    SignalConfig lc, sc;
    sc.cp_mode = CpMode::Short;
    Scenario s;
    s.profile = ChannelProfile::pedestrian_a();
    s.snr_db = -14.0;
    const auto a = estimate_pd(s, lc, 100, 31);
    const auto b = estimate_pd(s, sc, 100, 31);
    EXPECT_GE(a.ci95.hi, b.pd);
    EXPECT_GT(a.pd, b.pd);
}

// Gaussian interference adds to the noise floor, so lower SIR and shorter
// records both lower Pd where it is not saturated.
TEST(Sweep, InterferenceAndObservationTrends) {
    SignalConfig c;
    Scenario s;
    s.profile = ChannelProfile::pedestrian_a();
    s.snr_db = -14.0;
    const auto clean = estimate_pd(s, c, 100, 41);
    s.sir_db = -10.0;
    const auto jammed = estimate_pd(s, c, 100, 41);
    EXPECT_LT(jammed.pd, clean.pd);

    SweepSpec spec;
    spec.axis = SweepAxis::Observation;
    spec.values = {5e-3, 20e-3};
    spec.base = s;
    spec.base.snr_db = -14.0;
    spec.base.sir_db = -5.0;
    spec.trials = 100;
    const auto rows = sweep(spec);
    EXPECT_LT(rows[0].result.pd, rows[1].result.pd);
}

TEST(Calibrate, ReportFields) {
    SignalConfig c;
    Scenario s;
    s.observation_s = 3e-3;
    const auto rep = calibrate_pfa(s, c, 40, 3);
    EXPECT_EQ(rep.trials, 40u);
    EXPECT_EQ(rep.results.size(), 40u);
    EXPECT_NEAR(rep.gamma, 13.2767, 1e-4);
    EXPECT_GE(rep.ks_p, 0.0);
    EXPECT_LE(rep.ks_p, 1.0);
    EXPECT_LE(std::abs(rep.psi_correlation), 1.0);
}

TEST(CafProfile, PeaksAndFloor) {
    SignalConfig c;
    std::vector<double> delays;
    for (int t = 0; t <= 700; ++t) delays.push_back(t);
    const auto d = caf_profile(c, ProfileMode::DelayScanAtCf, 0.0, delays, 20e-3, 5);
    auto best = std::max_element(d.begin() + 20, d.end(),
                                 [](const ProfileRow& a, const ProfileRow& b) { return a.estimate < b.estimate; });
    EXPECT_NEAR(best->query, 512.0, 4.0);

    std::vector<double> cfs;
    for (int k = -320; k <= 320; ++k) cfs.push_back(k / 640.0);
    const auto f = caf_profile(c, ProfileMode::CfScanAtDelay, 0.0, cfs, 20e-3, 5);
    std::vector<ProfileRow> off_dc(f.begin(), f.end());
    off_dc.erase(std::remove_if(off_dc.begin(), off_dc.end(),
                                [](const ProfileRow& r) { return std::abs(r.query) < 0.01; }),
                 off_dc.end());
    std::sort(off_dc.begin(), off_dc.end(),
              [](const ProfileRow& a, const ProfileRow& b) { return a.estimate > b.estimate; });
    EXPECT_DOUBLE_EQ(std::abs(off_dc[0].query), 0.25);
    EXPECT_DOUBLE_EQ(std::abs(off_dc[1].query), 0.25);
    EXPECT_EQ(off_dc[0].query, -off_dc[1].query);

    // Off-support points sit at the estimation floor of a matched-length
    // white-noise record with the same power.
    const auto r = generate_frame(c, 20e-3, derive_seed(5, "frame", 0));
    Rng rng(9);
    ComplexStream w{std::vector<cd>(r.size()), r.sample_rate_hz};
    for (auto& v : w.samples) v = rng.complex_normal(mean_power(r));
    std::vector<double> floor;
    for (const auto& row : f)
        if (row.theory == 0.0) floor.push_back(std::abs(estimate_caf(w, {row.query, 0.0}).value));
    std::nth_element(floor.begin(), floor.begin() + floor.size() / 2, floor.end());
    const double median = floor[floor.size() / 2];
    for (const auto& row : f)
        if (row.theory == 0.0) {
            EXPECT_LT(row.estimate, 5.0 * median) << row.query;
        }
}

TEST(CafProfile, CsvAndModes) {
    EXPECT_EQ(parse_profile_mode("delay"), ProfileMode::DelayScanAtCf);
    EXPECT_EQ(parse_profile_mode("cf"), ProfileMode::CfScanAtDelay);
    EXPECT_THROW(parse_profile_mode("x"), ConfigError);
    const auto csv = profile_csv({{512.0, 0.01, 0.0125}});
    EXPECT_EQ(csv, "query,abs_estimate,abs_theory\n512,1.000000000e-02,1.250000000e-02\n");
}
