#pragma once

// Natural-frequency profiles omega(t) and the damping/inertia parameters of
// multi-rate networks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kuramoto/torus.hpp"

namespace kuramoto {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw, so that
/// seeded streams do not depend on the standard library's distributions.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::vector<double> sample_uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 rng{seed};
    std::vector<double> out(n);
    for (auto& w : out) w = lo + (hi - lo) * unit_uniform(rng);
    return out;
}

struct OmegaStats {
    double min = 0.0;
    double max = 0.0;
    double avg = 0.0;
    double variance = 0.0;  // population variance
};

inline OmegaStats omega_stats(std::span<const double> omega) {
    if (omega.empty()) throw std::invalid_argument("omega_stats: empty frequency list");
    OmegaStats s;
    auto [lo, hi] = std::minmax_element(omega.begin(), omega.end());
    s.min = *lo;
    s.max = *hi;
    double sum = 0.0;
    for (double w : omega) sum += w;
    const double n = static_cast<double>(omega.size());
    s.avg = sum / n;
    double ss = 0.0;
    for (double w : omega) ss += (w - s.avg) * (w - s.avg);
    s.variance = ss / n;
    return s;
}

/// Common frequency of a frequency-synchronized multi-rate network,
/// sum(omega) / sum(D).
inline double omega_sync(std::span<const double> omega, std::span<const double> damping) {
    if (omega.size() != damping.size()) throw std::invalid_argument("omega_sync: length mismatch");
    if (omega.empty()) throw std::invalid_argument("omega_sync: empty frequency list");
    double sw = 0.0;
    double sd = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!(damping[i] > 0.0)) throw std::invalid_argument("omega_sync: damping must be positive");
        sw += omega[i];
        sd += damping[i];
    }
    return sw / sd;
}

/// omega_i - D_i * omega_sync; sums to zero.
inline std::vector<double> scaled_frequencies(std::span<const double> omega, std::span<const double> damping) {
    const double ws = omega_sync(omega, damping);
    std::vector<double> out(omega.size());
    for (std::size_t i = 0; i < omega.size(); ++i) out[i] = omega[i] - damping[i] * ws;
    return out;
}

/// Time constants D (all n oscillators) and inertiae M of the first m
/// oscillators, which are the second-order ones.
struct DampingInertiaSpec {
    std::vector<double> damping;
    std::vector<double> inertia;
    std::size_t m = 0;

    static DampingInertiaSpec unit(std::size_t n) { return {std::vector<double>(n, 1.0), {}, 0}; }

    void validate(std::size_t n) const {
        if (damping.size() != n)
            throw std::invalid_argument("damping: expected " + std::to_string(n) + " entries, got " +
                                        std::to_string(damping.size()));
        if (m > n) throw std::invalid_argument("m must not exceed n");
        if (inertia.size() != m)
            throw std::invalid_argument("inertia: expected " + std::to_string(m) + " entries, got " +
                                        std::to_string(inertia.size()));
        for (double d : damping)
            if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("damping entries must be positive");
        for (double mi : inertia)
            if (!(mi > 0.0) || !std::isfinite(mi)) throw std::invalid_argument("inertia entries must be positive");
    }
};

enum class ProfileKind { constant, bipolar, uniform_sample, piecewise_switching, smooth_sinusoidal };

inline const char* to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::constant: return "constant";
        case ProfileKind::bipolar: return "bipolar";
        case ProfileKind::uniform_sample: return "uniform";
        case ProfileKind::piecewise_switching: return "switching";
        case ProfileKind::smooth_sinusoidal: return "sinusoidal";
    }
    return "unknown";
}

/// Natural frequencies as a function of time. Immutable after construction;
/// every value it can produce lies in `support()`.
///
/// Switching profiles are right-continuous: at exactly t = t_k the
/// post-switch values apply.
class FrequencyProfile {
public:
    static FrequencyProfile constant(std::vector<double> values) {
        if (values.empty()) throw std::invalid_argument("constant profile: no frequencies");
        FrequencyProfile p{ProfileKind::constant};
        for (double w : values)
            if (!std::isfinite(w)) throw std::invalid_argument("constant profile: non-finite frequency");
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        p.support_ = {*lo, *hi};
        p.levels_.push_back(std::move(values));
        return p;
    }

    /// The first n_low oscillators run at omega_min, the rest at omega_max.
    static FrequencyProfile bipolar(std::size_t n, double omega_min, double omega_max, std::size_t n_low) {
        if (n == 0 || n_low > n) throw std::invalid_argument("bipolar profile: need 0 <= n_low <= n, n >= 1");
        if (!(omega_min <= omega_max)) throw std::invalid_argument("bipolar profile: omega_min > omega_max");
        std::vector<double> values(n, omega_max);
        std::fill_n(values.begin(), n_low, omega_min);
        FrequencyProfile p{ProfileKind::bipolar};
        p.support_ = {omega_min, omega_max};
        p.levels_.push_back(std::move(values));
        return p;
    }

    static FrequencyProfile uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
        if (n == 0) throw std::invalid_argument("uniform profile: n must be positive");
        if (!(lo < hi)) throw std::invalid_argument("uniform profile: need lo < hi");
        FrequencyProfile p{ProfileKind::uniform_sample};
        p.support_ = {lo, hi};
        p.seed_ = seed;
        p.levels_.push_back(sample_uniform(n, lo, hi, seed));
        return p;
    }

    /// levels[0] holds on [0, t_1), levels[k] on [t_k, t_{k+1}).
    static FrequencyProfile switching(std::vector<double> switch_times, std::vector<std::vector<double>> levels,
                                      double dwell, Interval support) {
        if (levels.size() != switch_times.size() + 1)
            throw std::invalid_argument("switching profile: need one more level than switch times");
        if (!(dwell > 0.0)) throw std::invalid_argument("switching profile: dwell time must be positive");
        const std::size_t n = levels.front().size();
        if (n == 0) throw std::invalid_argument("switching profile: no frequencies");
        double prev = 0.0;
        for (double t : switch_times) {
            if (!(t - prev >= dwell))
                throw std::invalid_argument("switching profile: switch times must increase with dwell >= " +
                                            std::to_string(dwell));
            prev = t;
        }
        for (const auto& row : levels) {
            if (row.size() != n) throw std::invalid_argument("switching profile: ragged level matrix");
            for (double w : row)
                if (!support.contains(w)) throw std::invalid_argument("switching profile: level outside support");
        }
        FrequencyProfile p{ProfileKind::piecewise_switching};
        p.switch_times_ = std::move(switch_times);
        p.levels_ = std::move(levels);
        p.dwell_ = dwell;
        p.support_ = support;
        return p;
    }

    /// omega_i(t) = base_i + amplitude_i * sin(rate_i * t + phase_i).
    static FrequencyProfile sinusoidal(std::vector<double> base, std::vector<double> amplitude,
                                       std::vector<double> rate, std::vector<double> phase, Interval support) {
        const std::size_t n = base.size();
        if (n == 0) throw std::invalid_argument("sinusoidal profile: no frequencies");
        if (phase.empty()) phase.assign(n, 0.0);
        if (amplitude.size() != n || rate.size() != n || phase.size() != n)
            throw std::invalid_argument("sinusoidal profile: parameter lengths differ");
        for (std::size_t i = 0; i < n; ++i) {
            const double a = std::abs(amplitude[i]);
            if (base[i] - a < support.lo || base[i] + a > support.hi)
                throw std::invalid_argument("sinusoidal profile: oscillator " + std::to_string(i + 1) +
                                            " leaves the declared support");
        }
        FrequencyProfile p{ProfileKind::smooth_sinusoidal};
        p.levels_.push_back(std::move(base));
        p.amplitude_ = std::move(amplitude);
        p.rate_ = std::move(rate);
        p.phase_ = std::move(phase);
        p.support_ = support;
        return p;
    }

    [[nodiscard]] ProfileKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t size() const noexcept { return levels_.front().size(); }
    [[nodiscard]] Interval support() const noexcept { return support_; }
    [[nodiscard]] std::optional<std::uint64_t> seed() const noexcept { return seed_; }
    [[nodiscard]] std::span<const double> switch_times() const noexcept { return switch_times_; }
    [[nodiscard]] double dwell() const noexcept { return dwell_; }
    [[nodiscard]] bool piecewise_constant() const noexcept { return kind_ != ProfileKind::smooth_sinusoidal; }
    [[nodiscard]] bool time_invariant() const noexcept {
        return kind_ != ProfileKind::smooth_sinusoidal && kind_ != ProfileKind::piecewise_switching;
    }

    /// Piecewise levels (one row for time-invariant profiles, the base vector
    /// for sinusoidal ones).
    [[nodiscard]] const std::vector<std::vector<double>>& levels() const noexcept { return levels_; }
    [[nodiscard]] std::span<const double> amplitude() const noexcept { return amplitude_; }
    [[nodiscard]] std::span<const double> rate() const noexcept { return rate_; }
    [[nodiscard]] std::span<const double> phase() const noexcept { return phase_; }

    [[nodiscard]] std::vector<double> evaluate(double t) const {
        std::vector<double> out(size());
        evaluate_into(t, out);
        return out;
    }

    void evaluate_into(double t, std::span<double> out) const {
        if (kind_ == ProfileKind::smooth_sinusoidal) {
            const auto& base = levels_.front();
            for (std::size_t i = 0; i < base.size(); ++i)
                out[i] = base[i] + amplitude_[i] * std::sin(rate_[i] * t + phase_[i]);
            return;
        }
        const auto& row = levels_[level_index(t)];
        std::copy(row.begin(), row.end(), out.begin());
    }

    /// d omega / dt; zero for piecewise-constant profiles away from switches.
    [[nodiscard]] std::vector<double> rate_of_change(double t) const {
        std::vector<double> out(size(), 0.0);
        if (kind_ == ProfileKind::smooth_sinusoidal)
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = amplitude_[i] * rate_[i] * std::cos(rate_[i] * t + phase_[i]);
        return out;
    }

    [[nodiscard]] std::vector<double> acceleration(double t) const {
        std::vector<double> out(size(), 0.0);
        if (kind_ == ProfileKind::smooth_sinusoidal)
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = -amplitude_[i] * rate_[i] * rate_[i] * std::sin(rate_[i] * t + phase_[i]);
        return out;
    }

    [[nodiscard]] std::size_t level_index(double t) const noexcept {
        auto it = std::upper_bound(switch_times_.begin(), switch_times_.end(), t);
        return static_cast<std::size_t>(it - switch_times_.begin());
    }

private:
    explicit FrequencyProfile(ProfileKind k) : kind_{k} {}

    ProfileKind kind_;
    std::vector<std::vector<double>> levels_;
    std::vector<double> switch_times_;
    std::vector<double> amplitude_;
    std::vector<double> rate_;
    std::vector<double> phase_;
    double dwell_ = 0.0;
    Interval support_{};
    std::optional<std::uint64_t> seed_;
};

}  // namespace kuramoto
