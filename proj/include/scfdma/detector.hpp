// detector.hpp - two-feature cyclostationarity test for SC-FDMA presence
//
// Features: the CP-induced CAF at (beta = 0, tau = rho M) and the symbol-rate
// CAF at (beta = 1/rho, tau = 0). Each gives
//
//   Psi_i = U_s c_i Sigma_i^-1 c_i^T,   c_i = [Re c_hat_i, Im c_hat_i],
//
// asymptotically chi-square(2) under H0. Upsilon = Psi_1 + Psi_2 is compared
// with the chi-square(4) upper quantile at the target false-alarm rate.

#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <tuple>
#include <utility>

#include "scfdma/caf_estimation.hpp"
#include "scfdma/caf_theory.hpp"
#include "scfdma/types.hpp"

namespace scfdma {

enum class Decision { H0_absent, H1_present };

inline std::string_view to_string(Decision d) {
    return d == Decision::H1_present ? "H1_present" : "H0_absent";
}

struct FeatureVector {
    double re = 0.0;
    double im = 0.0;
};

struct FeatureStatistic {
    double psi = 0.0;
    FeatureVector c_hat;
    CovarianceEstimate covariance;
    bool regularized = false;
};

struct TestResult {
    double psi1 = 0.0;
    double psi2 = 0.0;
    double upsilon = 0.0;
    double gamma = 0.0;
    Decision decision = Decision::H0_absent;
    double p_fa_target = 0.0;
    std::size_t u_s = 0;
};

struct DetectorOptions {
    std::optional<std::size_t> u_sw;  ///< default: nearest odd to 0.006 U_s
    SpectralWindow window;
};

inline constexpr double kConditionLimit = 1e12;
inline constexpr double kRegularization = 1e-10;

/// Eigenvalues (min, max) of a symmetric 2x2 matrix.
inline std::pair<double, double> symmetric_eigenvalues(const Matrix2& s) {
    const double mid = 0.5 * (s[0][0] + s[1][1]);
    const double d = 0.5 * (s[0][0] - s[1][1]);
    const double rad = std::sqrt(d * d + s[0][1] * s[0][1]);
    return {mid - rad, mid + rad};
}

/// Adds eps * trace/2 * I when the condition number exceeds 1e12. Returns
/// whether the matrix was modified; throws if it stays non-invertible.
inline bool regularize(Matrix2& s) {
    const double trace = s[0][0] + s[1][1];
    if (!std::isfinite(trace) || !std::isfinite(s[0][1]) || !(trace > 0.0))
        throw NumericalError("covariance estimate is singular (zero or non-finite trace)");
    auto [lo, hi] = symmetric_eigenvalues(s);
    bool changed = false;
    if (!(lo > 0.0) || hi / lo > kConditionLimit) {
        const double add = kRegularization * trace / 2.0;
        s[0][0] += add;
        s[1][1] += add;
        changed = true;
        std::tie(lo, hi) = symmetric_eigenvalues(s);
    }
    if (!(lo > 0.0) || !std::isfinite(hi / lo))
        throw NumericalError("covariance estimate is not positive definite after regularization");
    return changed;
}

/// U c Sigma^-1 c^T for a positive-definite 2x2 Sigma.
inline double quadratic_form(const FeatureVector& c, const Matrix2& s, std::size_t u_s) {
    const double det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    const double x = c.re, y = c.im;
    const double q = (s[1][1] * x * x - (s[0][1] + s[1][0]) * x * y + s[0][0] * y * y) / det;
    return static_cast<double>(u_s) * q;
}

inline FeatureStatistic feature_statistic(const ComplexStream& r, const CafQuery& q,
                                          std::size_t u_sw, const SpectralWindow& window = {}) {
    const auto est = estimate_feature(r, q, u_sw, window);
    FeatureStatistic out;
    out.c_hat = {est.caf.value.real(), est.caf.value.imag()};
    out.covariance = est.covariance;
    out.regularized = regularize(out.covariance.sigma);
    out.psi = quadratic_form(out.c_hat, out.covariance.sigma, r.size());
    if (!std::isfinite(out.psi) || out.psi < 0.0)
        throw NumericalError("feature statistic is not a finite non-negative number");
    return out;
}

/// Gamma with P{X >= Gamma} = p_fa for X ~ chi-square(4).
inline double threshold(double p_fa) {
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw ConfigError("p_fa must lie in (0, 1)");
    return 2.0 * boost::math::gamma_q_inv(2.0, p_fa);
}

/// Smallest record the detector accepts: the CP lag plus room for a window.
inline std::size_t minimum_record(const SignalConfig& config) {
    return static_cast<std::size_t>(config.rho) * static_cast<std::size_t>(config.M) + 4;
}

inline TestResult detect(const ComplexStream& r, const SignalConfig& config, double p_fa,
                         const DetectorOptions& options = {}) {
    const double gamma = threshold(p_fa);
    const std::size_t U = r.size();
    if (U < minimum_record(config))
        throw ConfigError("detect: record shorter than the CP feature delay rho*M");
    const std::size_t u_sw = options.u_sw.value_or(default_window_length(U));
    const auto support = caf_support(config);
    const auto f1 = feature_statistic(r, support.cp_feature, u_sw, options.window);
    const auto f2 = feature_statistic(r, support.symbol_rate_feature, u_sw, options.window);
    TestResult t;
    t.psi1 = f1.psi;
    t.psi2 = f2.psi;
    t.upsilon = t.psi1 + t.psi2;
    t.gamma = gamma;
    t.decision = t.upsilon >= gamma ? Decision::H1_present : Decision::H0_absent;
    t.p_fa_target = p_fa;
    t.u_s = U;
    return t;
}

/// 10 U log2 U + 22 U + 50 U_sw + 42, rounded.
inline std::int64_t flop_count(std::int64_t u_s, std::int64_t u_sw) {
    if (u_s < 2) throw ConfigError("flop_count: u_s must be >= 2");
    const double u = static_cast<double>(u_s);
    const double flops = 10.0 * u * std::log2(u) + 22.0 * u + 50.0 * static_cast<double>(u_sw) + 42.0;
    return static_cast<std::int64_t>(std::llround(flops));
}

}  // namespace scfdma
