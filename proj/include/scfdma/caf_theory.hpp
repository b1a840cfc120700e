// caf_theory.hpp - closed-form cyclic autocorrelation of SC-FDMA signals
//
// The CAF factorizes into a delay-dependent coefficient and a pulse term.
// Delays are measured in symbol periods T and written tau = mu T + sgn(mu) tau_s
// with 0 <= tau_s < T. The coefficient is piecewise affine in tau_s:
//
//   case   |mu| range                          coefficient                      CF grid
//   a      |tau| < T                           (1-f) c_x/4 + f A(1)             k/T
//   b      odd,  1 .. M-L-1                    (1-f) A(mu)                      k/T
//   c      even, 2 .. M-L                      f A(mu+1)                        k/T
//   d      |tau| within T of M T               (1-f') c_x/4 + f' B(+/-)         b/((M+L)T)
//   e      odd,  M-L+1 .. M+L-1                (1-f) A(mu)                      b/((M+L)T)
//   f      even, M-L+2 .. M+L-2 (mu != M)      f A(mu+1)                        b/((M+L)T)
//   -      otherwise                           0
//
// with f = tau_s/T, A(mu) = c_x/(2N) / (1 - e^{j pi |mu|/N}), and for case d
// f' = | |tau|/T - M |, B(+) = c_x/(2N)/(1 - e^{+j pi/N}) on the side away from
// zero delay and B(-) with e^{-j pi/N} on the side towards it. Coefficients
// depend on |mu| only, so |CAF| is even in tau.
//
// The pulse term for the k/T family is T^-1 int |g|^2 e^{-j2 pi beta t} dt, and
// for the block family [(M+L)T]^-1 int sum_{u<L} |g(t-uT)|^2 e^{-j2 pi beta t} dt.
// Both are evaluated as Riemann sums over the same unit-energy RRC taps the
// generator uses, at rho samples per T, so theory and estimate share units.
//
// The expressions are derived for an integer expansion factor Q = 2; for other
// Q they are an approximation.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "scfdma/types.hpp"
#include "scfdma/waveform.hpp"

namespace scfdma {

/// A (cycle frequency, delay) pair in discrete units: beta in cycles/sample,
/// tau in samples.
struct CafQuery {
    double beta = 0.0;
    double tau = 0.0;
};

struct CafValue {
    cd value{0.0, 0.0};
    CafQuery query;
};

enum class CafCase { ZeroDelay, OddLag, EvenLag, CpPeak, CpOddLag, CpEvenLag, None };

enum class CfGrid { Symbol, Block, None };

inline CfGrid grid_of(CafCase c) {
    switch (c) {
    case CafCase::ZeroDelay:
    case CafCase::OddLag:
    case CafCase::EvenLag:
        return CfGrid::Symbol;
    case CafCase::CpPeak:
    case CafCase::CpOddLag:
    case CafCase::CpEvenLag:
        return CfGrid::Block;
    case CafCase::None:
        break;
    }
    return CfGrid::None;
}

inline char case_label(CafCase c) {
    switch (c) {
    case CafCase::ZeroDelay: return 'a';
    case CafCase::OddLag: return 'b';
    case CafCase::EvenLag: return 'c';
    case CafCase::CpPeak: return 'd';
    case CafCase::CpOddLag: return 'e';
    case CafCase::CpEvenLag: return 'f';
    case CafCase::None: break;
    }
    return '-';
}

/// A(mu) = c_x/(2N) * 1/(1 - e^{j pi |mu| / N}).
inline cd a_coefficient(long long mu, int N, double c_x) {
    if (mu == 0) throw ConfigError("a_coefficient: mu = 0 is a pole");
    if (N < 2) throw ConfigError("a_coefficient: N must be >= 2");
    const double mag = static_cast<double>(mu < 0 ? -mu : mu);
    const cd den = 1.0 - std::polar(1.0, kPi * mag / N);
    return (c_x / (2.0 * N)) / den;
}

/// sum_{p=0}^{N-1} 1 / (1 - cos(pi (2n - 2p + 1) / N)); equals N^2/2 for any n.
inline double n_squared_identity_check(int N, int n = 0) {
    if (N < 2) throw ConfigError("n_squared_identity_check: N must be >= 2");
    double acc = 0.0;
    for (int p = 0; p < N; ++p) acc += 1.0 / (1.0 - std::cos(kPi * (2.0 * n - 2.0 * p + 1.0) / N));
    return acc;
}

struct DelayTerm {
    CafCase which = CafCase::None;
    cd coefficient{0.0, 0.0};
};

/// Lag-structure parameters shared by every coefficient evaluation.
struct LagModel {
    int N = 72;
    int M = 128;
    int L = 32;
    double c_x = 1.0;

    static LagModel from(const SignalConfig& c) {
        // Short CP has no single L; the 9/128 symbols dominate a slot.
        const int L = c.cp_mode == CpMode::Long ? c.cp_length(0) : c.cp_length(1);
        return {c.N, c.M, L, c.c_x};
    }

    cd A(long long mu) const { return a_coefficient(mu, N, c_x); }

    /// Case d edge value: +1 away from zero delay, -1 towards it.
    cd cp_edge(int side) const {
        return (c_x / (2.0 * N)) / (1.0 - std::polar(1.0, side * kPi / N));
    }

    /// Formula governing the open interval |tau|/T in (mu, mu+1), evaluated at
    /// |tau|/T = mu + t. t = 0 and t = 1 give the one-sided limits.
    DelayTerm interval(long long mu, double t) const {
        if (mu < 0) throw ConfigError("LagModel::interval: mu must be >= 0");
        if (mu == 0) return {CafCase::ZeroDelay, (1.0 - t) * c_x / 4.0 + t * A(1)};
        if (mu == M - 1) return {CafCase::CpPeak, t * c_x / 4.0 + (1.0 - t) * cp_edge(-1)};
        if (mu == M) return {CafCase::CpPeak, (1.0 - t) * c_x / 4.0 + t * cp_edge(+1)};
        if (mu >= M + L) return {CafCase::None, {0.0, 0.0}};
        const bool odd = (mu % 2) != 0;
        if (mu <= M - L) {
            if (odd) return {CafCase::OddLag, (1.0 - t) * A(mu)};
            return {CafCase::EvenLag, t * A(mu + 1)};
        }
        if (odd) return {CafCase::CpOddLag, (1.0 - t) * A(mu)};
        return {CafCase::CpEvenLag, t * A(mu + 1)};
    }

    /// Value at an integer lag |tau| = mu T (tau_s = 0).
    DelayTerm at_lattice(long long mu) const {
        if (mu == M - 1 && mu > M - L) return {CafCase::CpOddLag, A(mu)};
        return interval(mu, 0.0);
    }

    /// Coefficient at delay tau given in symbol periods.
    DelayTerm at(double tau_symbols) const {
        const double a = std::abs(tau_symbols);
        const double mu = std::floor(a);
        const double t = a - mu;
        if (t == 0.0) return at_lattice(static_cast<long long>(mu));
        return interval(static_cast<long long>(mu), t);
    }
};

/// Pulse-correlation sums over the unit-energy RRC taps:
/// P(beta) = sum_n |g[n]|^2 e^{-j 2 pi beta n}, n centred on the peak.
class PulseCorrelation {
public:
    explicit PulseCorrelation(const std::vector<double>& taps) {
        power_.reserve(taps.size());
        for (double v : taps) power_.push_back(v * v);
        half_ = static_cast<long long>(taps.size() - 1) / 2;
    }

    cd operator()(double beta) const {
        cd acc{0.0, 0.0};
        for (std::size_t i = 0; i < power_.size(); ++i) {
            const double n = static_cast<double>(static_cast<long long>(i) - half_);
            acc += power_[i] * std::polar(1.0, -2.0 * kPi * beta * n);
        }
        return acc;
    }

private:
    std::vector<double> power_;
    long long half_ = 0;
};

/// Evaluates the closed-form CAF for one configuration.
class CafTheory {
public:
    explicit CafTheory(const SignalConfig& config)
        : config_(config), lags_(LagModel::from(config)), pulse_(rrc_taps(config)) {
        config_.validate();
    }

    const LagModel& lags() const { return lags_; }

    CafValue operator()(const CafQuery& q) const {
        CafValue out{{0.0, 0.0}, q};
        const int rho = config_.rho;
        DelayTerm term;
        const double tau_abs = std::abs(q.tau);
        if (tau_abs == std::floor(tau_abs)) {
            const auto t = static_cast<long long>(tau_abs);
            const long long mu = t / rho;
            const long long rem = t % rho;
            term = rem == 0 ? lags_.at_lattice(mu)
                            : lags_.interval(mu, static_cast<double>(rem) / rho);
        } else {
            term = lags_.at(tau_abs / rho);
        }
        if (term.which == CafCase::None) return out;

        if (grid_of(term.which) == CfGrid::Symbol) {
            if (!on_grid(q.beta * rho)) return out;
            out.value = term.coefficient * pulse_(q.beta) / static_cast<double>(rho);
        } else {
            const double period = static_cast<double>(rho) * (lags_.M + lags_.L);
            if (!on_grid(q.beta * period)) return out;
            cd shifts{0.0, 0.0};
            for (int u = 0; u < lags_.L; ++u)
                shifts += std::polar(1.0, -2.0 * kPi * q.beta * u * rho);
            out.value = term.coefficient * shifts * pulse_(q.beta) / period;
        }
        return out;
    }

private:
    static bool on_grid(double x) { return std::abs(x - std::round(x)) < 1e-9; }

    SignalConfig config_;
    LagModel lags_;
    PulseCorrelation pulse_;
};

inline CafValue theoretical_caf(const SignalConfig& config, const CafQuery& q) {
    return CafTheory(config)(q);
}

/// Where the CAF is non-zero, in discrete units.
struct CafSupport {
    CafQuery cp_feature;                     ///< (0, rho M)
    CafQuery symbol_rate_feature;            ///< (1/rho, 0)
    CafQuery conjugate_symbol_rate_feature;  ///< (-1/rho, 0)
    std::vector<double> symbol_cfs;          ///< k/rho with |k/rho| <= 1/2
    double block_cf_spacing = 0.0;           ///< 1/(rho (M+L))
    double symbol_family_max_delay = 0.0;    ///< k/rho CFs live at |tau| < this
    double block_family_min_delay = 0.0;     ///< block-rate CFs live at |tau| in
    double block_family_max_delay = 0.0;     ///<   (min, max)
    int N = 0;
    double c_x = 1.0;

    cd A(long long mu) const { return a_coefficient(mu, N, c_x); }
};

inline CafSupport caf_support(const SignalConfig& config) {
    config.validate();
    const auto lags = LagModel::from(config);
    const double rho = config.rho;
    CafSupport s;
    s.cp_feature = {0.0, rho * config.M};
    s.symbol_rate_feature = {1.0 / rho, 0.0};
    s.conjugate_symbol_rate_feature = {-1.0 / rho, 0.0};
    for (int k = -config.rho; k <= config.rho; ++k)
        if (std::abs(k / rho) <= 0.5) s.symbol_cfs.push_back(k / rho);
    s.block_cf_spacing = 1.0 / (rho * (lags.M + lags.L));
    s.symbol_family_max_delay = rho * (lags.M - lags.L + 1);
    s.block_family_min_delay = rho * (lags.M - lags.L);
    s.block_family_max_delay = rho * (lags.M + lags.L);
    s.N = config.N;
    s.c_x = config.c_x;
    return s;
}

}  // namespace scfdma
