#pragma once

// Angle arithmetic on the circle and the n-torus: geodesic distance, the
// smallest arc enclosing a set of phases, and the Kuramoto order parameter.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace kuramoto {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Maps any real number onto (-pi, pi].
inline double wrap_to_pi(double x) noexcept {
    double r = std::remainder(x, two_pi);
    if (r <= -pi) r += two_pi;
    return r;
}

/// A point on the circle, stored normalized to (-pi, pi].
class Angle {
public:
    constexpr Angle() = default;
    explicit Angle(double radians) noexcept : value_{wrap_to_pi(radians)} {}

    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

/// Phases of n >= 1 oscillators, each normalized to (-pi, pi].
class PhaseVector {
public:
    explicit PhaseVector(std::span<const double> radians) {
        if (radians.empty()) throw std::invalid_argument("PhaseVector: need at least one angle");
        angles_.reserve(radians.size());
        for (double x : radians) angles_.push_back(wrap_to_pi(x));
    }
    PhaseVector(std::initializer_list<double> radians)
        : PhaseVector(std::span<const double>(radians.begin(), radians.size())) {}

    [[nodiscard]] std::size_t size() const noexcept { return angles_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return angles_[i]; }
    [[nodiscard]] Angle angle(std::size_t i) const { return Angle{angles_[i]}; }
    [[nodiscard]] std::span<const double> values() const noexcept { return angles_; }

private:
    std::vector<double> angles_;
};

/// Centroid r e^{i psi} of the phasors. psi is meaningless when r is
/// (numerically) zero; `phase_defined` is false in that case and psi = 0.
struct OrderParameter {
    double magnitude = 0.0;
    double phase = 0.0;
    bool phase_defined = false;
};

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

inline constexpr double order_phase_threshold = 1e-12;

/// Length of the shorter of the two arcs between a and b, in [0, pi].
inline double geodesic_distance(Angle a, Angle b) noexcept {
    double d = std::fmod(std::abs(a.value() - b.value()), two_pi);
    return std::min(d, two_pi - d);
}

/// The smallest arc containing every phase. The arc runs counterclockwise
/// from the phase following the largest circular gap (`ccw_min`) to the
/// phase preceding it (`ccw_max`). Index sets hold every oscillator sitting
/// at the respective boundary point.
struct EnclosingArc {
    double length = 0.0;
    std::vector<std::size_t> ccw_min;
    std::vector<std::size_t> ccw_max;
};

inline constexpr double arc_tie_tolerance = 1e-12;

inline EnclosingArc enclosing_arc(const PhaseVector& theta) {
    const std::size_t n = theta.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return theta[a] < theta[b]; });

    // Gap k sits between sorted[k] and sorted[k+1]; gap n-1 wraps around.
    double largest_gap = -1.0;
    std::size_t gap_index = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double gap = (k + 1 < n) ? theta[order[k + 1]] - theta[order[k]]
                                 : theta[order[0]] + two_pi - theta[order[n - 1]];
        if (gap > largest_gap) {
            largest_gap = gap;
            gap_index = k;
        }
    }

    EnclosingArc arc;
    arc.length = std::max(0.0, two_pi - largest_gap);
    const double lo = theta[order[(gap_index + 1) % n]];
    const double hi = theta[order[gap_index]];
    for (std::size_t i = 0; i < n; ++i) {
        if (geodesic_distance(Angle{theta[i]}, Angle{lo}) <= arc_tie_tolerance) arc.ccw_min.push_back(i);
        if (geodesic_distance(Angle{theta[i]}, Angle{hi}) <= arc_tie_tolerance) arc.ccw_max.push_back(i);
    }
    return arc;
}

/// 2*pi minus the largest circular gap; theta lies in the closed cohesive
/// set of width gamma iff this is <= gamma. Equals the maximal pairwise
/// geodesic distance whenever the result is <= pi.
inline double enclosing_arc_length(const PhaseVector& theta) { return enclosing_arc(theta).length; }

inline double enclosing_arc_length(std::span<const double> theta) {
    return enclosing_arc_length(PhaseVector{theta});
}

inline OrderParameter order_parameter(std::span<const double> theta) {
    if (theta.empty()) throw std::invalid_argument("order_parameter: empty phase vector");
    double c = 0.0;
    double s = 0.0;
    for (double x : theta) {
        c += std::cos(x);
        s += std::sin(x);
    }
    const double n = static_cast<double>(theta.size());
    OrderParameter op;
    op.magnitude = std::min(1.0, std::hypot(c, s) / n);
    if (op.magnitude >= order_phase_threshold) {
        op.phase = std::atan2(s, c);
        op.phase_defined = true;
    }
    return op;
}

inline OrderParameter order_parameter(const PhaseVector& theta) { return order_parameter(theta.values()); }

/// Range of the order-parameter magnitude for phases inside a closed arc of
/// length gamma in [0, pi].
inline Interval cohesiveness_bounds(double gamma) {
    if (!(gamma >= 0.0 && gamma <= pi)) throw std::domain_error("cohesiveness_bounds: gamma must lie in [0, pi]");
    return {std::cos(gamma / 2.0), 1.0};
}

/// Arc lengths compatible with an order-parameter magnitude r, for phases
/// contained in a half circle.
inline Interval arc_from_order(double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("arc_from_order: r must lie in [0, 1]");
    return {2.0 * std::acos(r), pi};
}

}  // namespace kuramoto
