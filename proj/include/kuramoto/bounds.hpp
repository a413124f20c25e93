#pragma once

// Critical-coupling estimates for the first-order Kuramoto model and the
// performance quantities implied by a coupling margin K / K_critical.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kuramoto/frequency.hpp"
#include "kuramoto/torus.hpp"

namespace kuramoto {

/// Raised when K does not exceed K_critical, so no synchronization guarantee
/// can be given.
class NoSyncGuarantee : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The implicit-coupling residual failed to change sign over its bracket.
class BracketError : public std::runtime_error {
public:
    BracketError(double lo, double hi, double residual_lo, double residual_hi)
        : std::runtime_error("exact coupling: residual does not change sign on [" + std::to_string(lo) + ", " +
                             std::to_string(hi) + "] (residuals " + std::to_string(residual_lo) + ", " +
                             std::to_string(residual_hi) + ")"),
          lo_{lo}, hi_{hi}, residual_lo_{residual_lo}, residual_hi_{residual_hi} {}

    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }
    [[nodiscard]] double residual_lo() const noexcept { return residual_lo_; }
    [[nodiscard]] double residual_hi() const noexcept { return residual_hi_; }

private:
    double lo_, hi_, residual_lo_, residual_hi_;
};

inline void require_two_oscillators(std::span<const double> omega, const char* who) {
    if (omega.size() < 2) throw std::invalid_argument(std::string(who) + ": need at least two oscillators");
}

/// omega_max - omega_min: necessary and sufficient over all frequency
/// distributions supported on [omega_min, omega_max].
inline double explicit_critical_coupling(std::span<const double> omega) {
    require_two_oscillators(omega, "explicit_critical_coupling");
    auto s = omega_stats(omega);
    return s.max - s.min;
}

/// n (omega_max - omega_min) / (2 (n - 1)); no phase-locked state exists below it.
inline double necessary_bound(std::span<const double> omega) {
    require_two_oscillators(omega, "necessary_bound");
    auto s = omega_stats(omega);
    const double n = static_cast<double>(omega.size());
    return n * (s.max - s.min) / (2.0 * (n - 1.0));
}

struct ExactCoupling {
    double value = 0.0;   // K_exact
    double u_star = 0.0;  // root of the consistency equation
    int iterations = 0;
    double residual = 0.0;
    bool degenerate = false;  // all frequencies equal, nothing to solve
};

/// Centered frequencies Omega_i = omega_i - mean(omega).
inline std::vector<double> centered(std::span<const double> omega) {
    const double avg = omega_stats(omega).avg;
    std::vector<double> out(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) out[i] = omega[i] - avg;
    return out;
}

/// 2 sum sqrt(1 - (Omega_i/u)^2) - sum 1/sqrt(1 - (Omega_i/u)^2). Negative
/// just above ||Omega||_inf, positive at 2 ||Omega||_inf.
inline double consistency_residual(std::span<const double> big_omega, double u) {
    double lhs = 0.0;
    double rhs = 0.0;
    for (double w : big_omega) {
        const double q = w / u;
        const double s = std::sqrt(std::max(0.0, 1.0 - q * q));
        lhs += s;
        rhs += 1.0 / s;
    }
    return 2.0 * lhs - rhs;
}

inline constexpr double exact_bracket_offset = 1e-12;
inline constexpr double exact_residual_target = 1e-12;

/// Exact critical coupling from the implicit consistency equations, solved
/// by bisection on u in [||Omega||_inf (1 + 1e-12), 2 ||Omega||_inf].
inline ExactCoupling exact_implicit_coupling(std::span<const double> omega) {
    require_two_oscillators(omega, "exact_implicit_coupling");
    const auto big_omega = centered(omega);
    double norm_inf = 0.0;
    for (double w : big_omega) norm_inf = std::max(norm_inf, std::abs(w));

    ExactCoupling out;
    if (norm_inf == 0.0 || explicit_critical_coupling(omega) == 0.0) {
        out.degenerate = true;
        return out;
    }

    double lo = norm_inf * (1.0 + exact_bracket_offset);
    double hi = 2.0 * norm_inf;
    double f_lo = consistency_residual(big_omega, lo);
    double f_hi = consistency_residual(big_omega, hi);
    if (!(f_lo < 0.0 && f_hi > 0.0)) throw BracketError(lo, hi, f_lo, f_hi);

    double mid = 0.5 * (lo + hi);
    double f_mid = consistency_residual(big_omega, mid);
    int it = 1;
    for (; it < 200; ++it) {
        if (std::abs(f_mid) < exact_residual_target) break;
        if (f_mid < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        const double next = 0.5 * (lo + hi);
        if (next <= lo || next >= hi) break;  // bracket is one ulp wide
        mid = next;
        f_mid = consistency_residual(big_omega, mid);
    }

    double sum_s = 0.0;
    for (double w : big_omega) {
        const double q = w / mid;
        sum_s += std::sqrt(1.0 - q * q);
    }
    out.u_star = mid;
    out.value = static_cast<double>(omega.size()) * mid / sum_s;
    out.iterations = it;
    out.residual = f_mid;
    return out;
}

/// Onset of synchronization in the continuum limit for a unimodal symmetric
/// density with value g0 at its center.
inline double continuum_kuramoto_bound(double g0) {
    if (!(g0 > 0.0) || !std::isfinite(g0)) throw std::domain_error("continuum bound: g(0) must be positive");
    return 2.0 / (pi * g0);
}

/// A frequency density on the normalized support [-1, 1]: tabulated values
/// on a uniform grid with an odd number of nodes, plus optional point masses.
struct TabulatedDensity {
    struct Atom {
        double location = 0.0;
        double mass = 0.0;
    };

    std::vector<double> values;
    std::vector<Atom> atoms;

    [[nodiscard]] double spacing() const { return 2.0 / static_cast<double>(values.size() - 1); }
    [[nodiscard]] double node(std::size_t k) const { return -1.0 + spacing() * static_cast<double>(k); }

    static TabulatedDensity from_function(const std::function<double(double)>& g, std::size_t points) {
        if (points < 3 || points % 2 == 0) throw std::invalid_argument("density: need an odd number >= 3 of nodes");
        TabulatedDensity d;
        d.values.resize(points);
        for (std::size_t k = 0; k < points; ++k) d.values[k] = g(d.node(k));
        return d;
    }

    static TabulatedDensity uniform(std::size_t points = 20001) {
        return from_function([](double) { return 0.5; }, points);
    }

    /// Half the mass at each of -1 and +1.
    static TabulatedDensity bipolar(std::size_t points = 3) {
        TabulatedDensity d = from_function([](double) { return 0.0; }, points);
        d.atoms = {{-1.0, 0.5}, {1.0, 0.5}};
        return d;
    }
};

/// Composite Simpson rule of f(omega) g(omega) over the density's grid, plus
/// the atoms' contribution.
inline double integrate_against(const TabulatedDensity& g, const std::function<double(double)>& f) {
    const std::size_t n = g.values.size();
    const double h = g.spacing();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k + 1 == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += w * f(g.node(k)) * g.values[k];
    }
    acc *= h / 3.0;
    for (const auto& a : g.atoms) acc += a.mass * f(a.location);
    return acc;
}

inline void validate_density(const TabulatedDensity& g) {
    if (g.values.size() < 3 || g.values.size() % 2 == 0)
        throw std::invalid_argument("density: need an odd number >= 3 of nodes");
    for (double v : g.values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("density: values must be nonnegative");
    for (const auto& a : g.atoms) {
        if (!(a.mass >= 0.0)) throw std::invalid_argument("density: atom masses must be nonnegative");
        if (a.location < -1.0 || a.location > 1.0) throw std::invalid_argument("density: atom outside [-1, 1]");
    }
    const double mass = integrate_against(g, [](double) { return 1.0; });
    if (std::abs(mass - 1.0) > 1e-6)
        throw std::invalid_argument("density: total mass " + std::to_string(mass) + " is not 1");
}

struct ErmentroutResult {
    double K = 0.0;          // omega_max / functional_max
    double maximizer = 0.0;  // p*
    double functional_max = 0.0;
};

inline constexpr double ermentrout_p_lo = 1.0;
inline constexpr double ermentrout_p_hi = 10.0;

/// Phase-locking threshold for a symmetric density on [-omega_max,
/// omega_max], evaluated in normalized units:
///   omega_max / K = max_{p >= 1} (1/p^2) int sqrt(p^2 - w^2) g(w) dw.
inline ErmentroutResult ermentrout_bound(const TabulatedDensity& g, double omega_max = 1.0) {
    validate_density(g);
    if (!(omega_max > 0.0)) throw std::domain_error("ermentrout_bound: omega_max must be positive");

    auto functional = [&](double p) {
        const double p2 = p * p;
        return integrate_against(g, [p2](double w) { return std::sqrt(std::max(0.0, p2 - w * w)); }) / p2;
    };

    // Golden-section search for the maximum on [1, 10].
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = ermentrout_p_lo;
    double b = ermentrout_p_hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = functional(c);
    double fd = functional(d);
    while (b - a > 1e-10) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = functional(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = functional(d);
        }
    }
    ErmentroutResult out;
    out.maximizer = 0.5 * (a + b);
    out.functional_max = functional(out.maximizer);
    const double at_lo = functional(ermentrout_p_lo);
    if (at_lo >= out.functional_max) {
        out.maximizer = ermentrout_p_lo;
        out.functional_max = at_lo;
    }
    if (out.maximizer >= 9.9) throw std::logic_error("ermentrout_bound: maximizer reached the search boundary");
    out.K = omega_max / out.functional_max;
    return out;
}

inline double sinc(double x) noexcept { return x == 0.0 ? 1.0 : std::sin(x) / x; }

/// Cohesiveness and rate guarantees for a coupling K above K_critical.
struct PerformanceEnvelope {
    double K = 0.0;
    double K_critical = 0.0;
    double gamma_min = 0.0;  // ultimate arc, in [0, pi/2)
    double gamma_max = 0.0;  // admissible initial arc, in (pi/2, pi]
    double r_floor = 1.0;    // asymptotic order-parameter magnitude lower bound

    /// Frequency-synchronization rate for phases cohesive in an arc gamma < pi/2.
    [[nodiscard]] double lambda_fs(double gamma) const {
        if (!(gamma >= 0.0 && gamma < pi / 2.0)) throw std::domain_error("lambda_fs: gamma must lie in [0, pi/2)");
        return K * std::cos(gamma);
    }

    /// Phase-synchronization rate (identical frequencies) for an arc gamma < pi.
    [[nodiscard]] double lambda_ps(double gamma) const {
        if (!(gamma >= 0.0 && gamma < pi)) throw std::domain_error("lambda_ps: gamma must lie in [0, pi)");
        return K * sinc(gamma);
    }
};

inline PerformanceEnvelope performance_envelope(double K, double K_critical) {
    if (!(K_critical >= 0.0)) throw std::domain_error("performance_envelope: K_critical must be nonnegative");
    if (!(K > K_critical))
        throw NoSyncGuarantee("performance_envelope: K = " + std::to_string(K) + " does not exceed K_critical = " +
                              std::to_string(K_critical) + "; no synchronization guarantee");
    const double ratio = K_critical / K;
    PerformanceEnvelope env;
    env.K = K;
    env.K_critical = K_critical;
    env.gamma_min = std::asin(ratio);
    env.gamma_max = pi - env.gamma_min;
    env.r_floor = std::sqrt((1.0 + std::sqrt(1.0 - ratio * ratio)) / 2.0);
    return env;
}

struct BoundReport {
    std::size_t n = 0;
    double K_explicit = 0.0;
    double K_necessary = 0.0;
    std::optional<ExactCoupling> K_exact;
    std::optional<double> K_continuum;
    std::optional<ErmentroutResult> K_ermentrout;
};

struct BoundOptions {
    bool exact = true;
    std::optional<double> continuum_g0;
    std::optional<TabulatedDensity> density;
};

inline BoundReport compute_bounds(std::span<const double> omega, const BoundOptions& opt = {}) {
    BoundReport rep;
    rep.n = omega.size();
    rep.K_explicit = explicit_critical_coupling(omega);
    rep.K_necessary = necessary_bound(omega);
    if (opt.exact) rep.K_exact = exact_implicit_coupling(omega);
    if (opt.continuum_g0) rep.K_continuum = continuum_kuramoto_bound(*opt.continuum_g0);
    if (opt.density) {
        // The density lives on [-1, 1]; rescale by the half-width of the sample.
        const double half_span = 0.5 * rep.K_explicit;
        rep.K_ermentrout = ermentrout_bound(*opt.density, half_span > 0.0 ? half_span : 1.0);
    }
    return rep;
}

}  // namespace kuramoto
