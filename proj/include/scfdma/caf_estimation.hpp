// caf_estimation.hpp - finite-record CAF estimator and its covariance
//
//   c_hat(beta, tau) = U^-1 sum_{u=0}^{U-1} r(u) r*(u - tau) e^{-j 2 pi beta u}
//   F_tau(beta)      = U c_hat(beta, tau)
//
// Lag-product terms whose index u - tau falls outside the record are zero
// (truncated sum, no circular wrap).
//
// The covariance of sqrt(U) c_hat is estimated by smoothing the cyclic
// periodogram over a spectral window of odd length U_sw around beta:
//
//   Q20 = (U U_sw)^-1 sum_s W(s) F(beta - s/U) F(beta + s/U)
//   Q21 = (U U_sw)^-1 sum_s W(s) |F(beta + s/U)|^2
//
// and assembled into the 2x2 covariance of (Re, Im):
//
//   [ Re(Q20+Q21)/2   Im(Q20-Q21)/2 ]
//   [ Im(Q20+Q21)/2   Re(Q21-Q20)/2 ]
//
// F at the shifted CFs comes from one FFT of the modulated lag product;
// shifted_periodograms_direct is the O(U U_sw) reference.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "scfdma/caf_theory.hpp"
#include "scfdma/fft.hpp"
#include "scfdma/types.hpp"

namespace scfdma {

struct CafEstimate {
    cd value{0.0, 0.0};
    CafQuery query;
    std::size_t u_s = 0;
};

enum class WindowKind { Rectangular, Kaiser };

struct SpectralWindow {
    WindowKind kind = WindowKind::Rectangular;
    double kaiser_beta = 6.0;
};

inline SpectralWindow parse_window(const std::string& name) {
    if (name == "rect" || name == "rectangular") return {WindowKind::Rectangular, 0.0};
    if (name == "kaiser") return {WindowKind::Kaiser, 6.0};
    throw ConfigError("unknown spectral window: " + name);
}

using Matrix2 = std::array<std::array<double, 2>, 2>;

struct CovarianceEstimate {
    Matrix2 sigma{};
    cd q20{0.0, 0.0};
    double q21 = 0.0;
    std::size_t u_sw = 0;
    SpectralWindow window;
};

namespace detail {

inline long long integral_delay(double tau) {
    const double r = std::round(tau);
    if (std::abs(tau - r) > 1e-9) throw ConfigError("CAF estimation needs an integer delay");
    return static_cast<long long>(r);
}

inline void check_record(const ComplexStream& r, long long tau) {
    require_nonempty(r, "CAF estimation");
    const auto U = static_cast<long long>(r.size());
    if ((tau < 0 ? -tau : tau) >= U) throw ConfigError("CAF estimation: |tau| must be below U_s");
}

/// e^{-j 2 pi beta u} with the phase reduced mod 1 before scaling.
inline cd rotor(double beta, std::size_t u) {
    double cycles = beta * static_cast<double>(u);
    cycles -= std::floor(cycles);
    return std::polar(1.0, -2.0 * kPi * cycles);
}

}  // namespace detail

/// f(u) = r(u) r*(u - tau), zero where u - tau is outside [0, U).
inline std::vector<cd> lag_product(const ComplexStream& r, long long tau) {
    detail::check_record(r, tau);
    const auto U = static_cast<long long>(r.size());
    std::vector<cd> f(static_cast<std::size_t>(U), cd{0.0, 0.0});
    const long long lo = tau > 0 ? tau : 0;
    const long long hi = tau < 0 ? U + tau : U;
    for (long long u = lo; u < hi; ++u)
        f[static_cast<std::size_t>(u)] =
            r.samples[static_cast<std::size_t>(u)] * std::conj(r.samples[static_cast<std::size_t>(u - tau)]);
    return f;
}

inline cd cyclic_periodogram_component(const ComplexStream& r, double tau, double beta) {
    const long long t = detail::integral_delay(tau);
    detail::check_record(r, t);
    const auto U = static_cast<long long>(r.size());
    const long long lo = t > 0 ? t : 0;
    const long long hi = t < 0 ? U + t : U;
    cd acc{0.0, 0.0};
    for (long long u = lo; u < hi; ++u) {
        const auto iu = static_cast<std::size_t>(u);
        acc += r.samples[iu] * std::conj(r.samples[static_cast<std::size_t>(u - t)]) *
               detail::rotor(beta, iu);
    }
    return acc;
}

inline CafEstimate estimate_caf(const ComplexStream& r, const CafQuery& q) {
    const cd F = cyclic_periodogram_component(r, q.tau, q.beta);
    return {F / static_cast<double>(r.size()), q, r.size()};
}

/// F_tau(beta + s/U) for s = -half_width..half_width via one FFT.
inline std::vector<cd> shifted_periodograms(const ComplexStream& r, const CafQuery& q,
                                            std::size_t half_width) {
    const long long t = detail::integral_delay(q.tau);
    auto y = lag_product(r, t);
    const std::size_t U = y.size();
    if (2 * half_width + 1 > U) throw ConfigError("spectral window wider than the record");
    if (q.beta != 0.0)
        for (std::size_t u = 0; u < U; ++u) y[u] *= detail::rotor(q.beta, u);
    const auto Y = fft::forward(y);
    std::vector<cd> out(2 * half_width + 1);
    const auto h = static_cast<long long>(half_width);
    const auto Ul = static_cast<long long>(U);
    for (long long s = -h; s <= h; ++s) {
        const long long k = ((s % Ul) + Ul) % Ul;
        out[static_cast<std::size_t>(s + h)] = Y[static_cast<std::size_t>(k)];
    }
    return out;
}

/// Reference path: direct summation at each shifted CF.
inline std::vector<cd> shifted_periodograms_direct(const ComplexStream& r, const CafQuery& q,
                                                   std::size_t half_width) {
    const auto U = static_cast<double>(r.size());
    std::vector<cd> out(2 * half_width + 1);
    const auto h = static_cast<long long>(half_width);
    for (long long s = -h; s <= h; ++s)
        out[static_cast<std::size_t>(s + h)] =
            cyclic_periodogram_component(r, q.tau, q.beta + static_cast<double>(s) / U);
    return out;
}

/// Nearest odd integer to 0.006 U, at least 3.
inline std::size_t default_window_length(std::size_t u_s) {
    auto n = static_cast<long long>(std::llround(0.006 * static_cast<double>(u_s)));
    if (n % 2 == 0) {
        const double exact = 0.006 * static_cast<double>(u_s);
        n += (exact >= static_cast<double>(n)) ? 1 : -1;
    }
    if (n < 3) n = 3;
    return static_cast<std::size_t>(n);
}

/// Window weights W(s), s = -(u_sw-1)/2 .. (u_sw-1)/2, scaled so sum W = u_sw.
inline std::vector<double> window_weights(std::size_t u_sw, const SpectralWindow& w) {
    if (u_sw < 1 || u_sw % 2 == 0) throw ConfigError("spectral window length must be odd");
    std::vector<double> W(u_sw, 1.0);
    if (w.kind == WindowKind::Kaiser && u_sw > 1) {
        const double half = static_cast<double>(u_sw - 1) / 2.0;
        const double i0b = std::cyl_bessel_i(0.0, w.kaiser_beta);
        double sum = 0.0;
        for (std::size_t i = 0; i < u_sw; ++i) {
            const double x = (static_cast<double>(i) - half) / half;
            W[i] = std::cyl_bessel_i(0.0, w.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - x * x))) / i0b;
            sum += W[i];
        }
        for (double& v : W) v *= static_cast<double>(u_sw) / sum;
    }
    return W;
}

inline Matrix2 assemble_covariance(cd q20, double q21) {
    Matrix2 s{};
    s[0][0] = 0.5 * (q20.real() + q21);
    s[0][1] = 0.5 * q20.imag();
    s[1][0] = 0.5 * q20.imag();
    s[1][1] = 0.5 * (q21 - q20.real());
    return s;
}

/// Covariance from the periodogram values F(beta + s/U), s = -h..h, h = (u_sw-1)/2.
inline CovarianceEstimate covariance_from_periodograms(std::span<const cd> F, std::size_t u_s,
                                                       const SpectralWindow& window) {
    const std::size_t u_sw = F.size();
    const auto W = window_weights(u_sw, window);
    const std::size_t h = (u_sw - 1) / 2;
    cd q20{0.0, 0.0};
    double q21 = 0.0;
    for (std::size_t i = 0; i < u_sw; ++i) {
        q20 += W[i] * F[2 * h - i] * F[i];
        q21 += W[i] * std::norm(F[i]);
    }
    const double scale = 1.0 / (static_cast<double>(u_s) * static_cast<double>(u_sw));
    CovarianceEstimate c;
    c.q20 = q20 * scale;
    c.q21 = q21 * scale;
    c.sigma = assemble_covariance(c.q20, c.q21);
    c.u_sw = u_sw;
    c.window = window;
    return c;
}

inline void check_window_length(std::size_t u_sw, std::size_t u_s) {
    if (u_sw % 2 == 0) throw ConfigError("spectral window length must be odd");
    if (u_sw < 3) throw ConfigError("spectral window length must be >= 3");
    if (u_sw >= u_s) throw ConfigError("spectral window length must be below U_s");
}

inline CovarianceEstimate estimate_covariance(const ComplexStream& r, const CafQuery& q,
                                              std::size_t u_sw, const SpectralWindow& window = {}) {
    require_nonempty(r, "estimate_covariance");
    check_window_length(u_sw, r.size());
    const auto F = shifted_periodograms(r, q, (u_sw - 1) / 2);
    return covariance_from_periodograms(F, r.size(), window);
}

/// c_hat and its covariance from a single FFT of the lag product.
struct FeatureEstimate {
    CafEstimate caf;
    CovarianceEstimate covariance;
};

inline FeatureEstimate estimate_feature(const ComplexStream& r, const CafQuery& q,
                                        std::size_t u_sw, const SpectralWindow& window = {}) {
    require_nonempty(r, "estimate_feature");
    check_window_length(u_sw, r.size());
    const std::size_t h = (u_sw - 1) / 2;
    const auto F = shifted_periodograms(r, q, h);
    FeatureEstimate out;
    out.caf = {F[h] / static_cast<double>(r.size()), q, r.size()};
    out.covariance = covariance_from_periodograms(F, r.size(), window);
    return out;
}

}  // namespace scfdma
