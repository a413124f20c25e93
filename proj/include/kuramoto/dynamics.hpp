#pragma once

// Fixed-step integration of the first-order, multi-rate, and scaled Kuramoto
// models, with the per-step diagnostics used to check cohesiveness and
// synchronization rates.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kuramoto/frequency.hpp"
#include "kuramoto/ode.hpp"
#include "kuramoto/torus.hpp"

namespace kuramoto {

enum class Model {
    first_order,                     // theta_i' = omega_i - (K/n) sum sin(theta_i - theta_j)
    multi_rate,                      // m second-order oscillators, n - m first-order with time constants
    first_order_multi_rate,          // inertia dropped, plus decoupled frequency dynamics
    scaled,                          // unit time constants, scaled frequencies omega_bar
    scaled_with_frequency_dynamics,  // scaled model plus scaled frequency dynamics
};

inline const char* to_string(Model m) {
    switch (m) {
        case Model::first_order: return "first-order";
        case Model::multi_rate: return "multi-rate";
        case Model::first_order_multi_rate: return "first-order-multi-rate";
        case Model::scaled: return "scaled";
        case Model::scaled_with_frequency_dynamics: return "scaled-with-frequency-dynamics";
    }
    return "unknown";
}

inline Model model_from_string(const std::string& s) {
    for (Model m : {Model::first_order, Model::multi_rate, Model::first_order_multi_rate, Model::scaled,
                    Model::scaled_with_frequency_dynamics})
        if (s == to_string(m)) return m;
    throw std::invalid_argument("unknown model '" + s + "'");
}

/// Stationary frame (nu = 0) or a frame rotating at nu rad/s.
struct Frame {
    bool rotating = false;
    double nu = 0.0;

    [[nodiscard]] double rate() const noexcept { return rotating ? nu : 0.0; }
};

struct NetworkSpec {
    Model model = Model::first_order;
    FrequencyProfile profile;
    double K = 1.0;
    DampingInertiaSpec dd;
    Frame frame;

    [[nodiscard]] std::size_t n() const noexcept { return profile.size(); }
    [[nodiscard]] std::size_t m() const noexcept { return dd.m; }

    /// Number of velocity states carried next to the n phases.
    [[nodiscard]] std::size_t velocity_dim() const noexcept {
        return (model == Model::first_order || model == Model::scaled) ? 0 : dd.m;
    }

    void validate() const {
        if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("coupling K must be positive");
        dd.validate(n());
        if (model == Model::first_order) {
            if (dd.m != 0) throw std::invalid_argument("first-order model requires m = 0");
            for (double d : dd.damping)
                if (d != 1.0) throw std::invalid_argument("first-order model requires unit time constants");
        }
        if (model == Model::scaled && dd.m != 0) throw std::invalid_argument("scaled model requires m = 0");
    }
};

/// First-order Kuramoto network with unit time constants.
inline NetworkSpec first_order_network(FrequencyProfile profile, double K) {
    const std::size_t n = profile.size();
    return NetworkSpec{Model::first_order, std::move(profile), K, DampingInertiaSpec::unit(n), {}};
}

/// Phases (unwrapped lift of the torus) and the velocity states.
struct State {
    std::vector<double> theta;
    std::vector<double> thetadot;
};

inline std::vector<double> flatten(const State& s) {
    std::vector<double> y(s.theta);
    y.insert(y.end(), s.thetadot.begin(), s.thetadot.end());
    return y;
}

inline State unflatten(std::span<const double> y, std::size_t n) {
    return {std::vector<double>(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)),
            std::vector<double>(y.begin() + static_cast<std::ptrdiff_t>(n), y.end())};
}

/// out_i = (K/n) sum_j sin(theta_i - theta_j), evaluated through the mean field.
inline void coupling_terms(double K, std::span<const double> theta, std::span<double> out) {
    const std::size_t n = theta.size();
    double c = 0.0;
    double s = 0.0;
    for (double x : theta) {
        c += std::cos(x);
        s += std::sin(x);
    }
    const double scale = K / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = scale * (std::sin(theta[i]) * c - std::cos(theta[i]) * s);
}

/// Same as coupling_terms, by direct pairwise summation.
inline void coupling_terms_pairwise(double K, std::span<const double> theta, std::span<double> out) {
    const std::size_t n = theta.size();
    const double scale = K / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += std::sin(theta[i] - theta[j]);
        out[i] = scale * acc;
    }
}

/// -(K/n) sum_{i<j} cos(theta_i - theta_j); its gradient is the coupling.
inline double coupling_potential(double K, std::span<const double> theta) {
    double c = 0.0;
    double s = 0.0;
    for (double x : theta) {
        c += std::cos(x);
        s += std::sin(x);
    }
    const double n = static_cast<double>(theta.size());
    return -(K / n) * 0.5 * (c * c + s * s - n);
}

/// Laplacian of the weights a_ij = (K/n) cos(theta_i - theta_j); also the
/// Hessian of coupling_potential.
inline Eigen::MatrixXd cosine_laplacian(double K, std::span<const double> theta) {
    const auto n = static_cast<Eigen::Index>(theta.size());
    const double scale = K / static_cast<double>(n);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double a = scale * std::cos(theta[static_cast<std::size_t>(i)] - theta[static_cast<std::size_t>(j)]);
            L(i, j) = -a;
            L(i, i) += a;
        }
    }
    return L;
}

/// Right-hand side of the configured model for a given frequency vector.
class ModelRhs {
public:
    explicit ModelRhs(const NetworkSpec& spec) : spec_{spec}, coupling_(spec.n()) {}

    /// Frequency the phase velocities converge to when synchronized, in the
    /// network's frame.
    [[nodiscard]] double reference_frequency(std::span<const double> omega) const {
        const double nu = spec_.frame.rate();
        switch (spec_.model) {
            case Model::first_order: return omega_stats(omega).avg - nu;
            case Model::multi_rate:
            case Model::first_order_multi_rate: return omega_sync(omega, spec_.dd.damping) - nu;
            case Model::scaled:
            case Model::scaled_with_frequency_dynamics: return -nu;
        }
        return 0.0;
    }

    /// Forcing of the phase equations with unit time constants (first-order
    /// and scaled models), in the network's frame.
    [[nodiscard]] std::vector<double> unit_forcing(std::span<const double> omega) const {
        std::vector<double> f(omega.begin(), omega.end());
        if (spec_.model == Model::scaled || spec_.model == Model::scaled_with_frequency_dynamics)
            f = scaled_frequencies(omega, spec_.dd.damping);
        for (double& x : f) x -= spec_.frame.rate();
        return f;
    }

    void operator()(std::span<const double> omega, std::span<const double> y, std::span<double> dy) {
        const std::size_t n = spec_.n();
        const std::size_t m = spec_.m();
        const double nu = spec_.frame.rate();
        const auto& D = spec_.dd.damping;
        const auto& M = spec_.dd.inertia;
        auto theta = y.first(n);
        coupling_terms(spec_.K, theta, coupling_);

        switch (spec_.model) {
            case Model::first_order:
                for (std::size_t i = 0; i < n; ++i) dy[i] = omega[i] - nu - coupling_[i];
                break;
            case Model::multi_rate:
                for (std::size_t i = 0; i < m; ++i) {
                    const double v = y[n + i];
                    dy[i] = v;
                    dy[n + i] = (omega[i] - D[i] * nu - D[i] * v - coupling_[i]) / M[i];
                }
                for (std::size_t i = m; i < n; ++i) dy[i] = (omega[i] - D[i] * nu - coupling_[i]) / D[i];
                break;
            case Model::first_order_multi_rate: {
                for (std::size_t i = 0; i < n; ++i) dy[i] = (omega[i] - D[i] * nu - coupling_[i]) / D[i];
                const double ws = omega_sync(omega, D);
                for (std::size_t i = 0; i < m; ++i) dy[n + i] = -D[i] / M[i] * (y[n + i] + nu - ws);
                break;
            }
            case Model::scaled:
            case Model::scaled_with_frequency_dynamics: {
                const double ws = omega_sync(omega, D);
                for (std::size_t i = 0; i < n; ++i) dy[i] = omega[i] - D[i] * ws - nu - coupling_[i];
                if (spec_.model == Model::scaled_with_frequency_dynamics)
                    for (std::size_t i = 0; i < m; ++i) dy[n + i] = -D[i] / M[i] * (y[n + i] + nu);
                break;
            }
        }
    }

private:
    const NetworkSpec& spec_;
    std::vector<double> coupling_;
};

/// Time derivative of the state at time t.
inline State vector_field(const NetworkSpec& spec, const State& state, double t) {
    spec.validate();
    if (state.theta.size() != spec.n() || state.thetadot.size() != spec.velocity_dim())
        throw std::invalid_argument("vector_field: state dimensions do not match the network");
    ModelRhs rhs{spec};
    const auto omega = spec.profile.evaluate(t);
    const auto y = flatten(state);
    std::vector<double> dy(y.size());
    rhs(omega, y, dy);
    return unflatten(dy, spec.n());
}

class IntegrationError : public std::runtime_error {
public:
    explicit IntegrationError(std::size_t step)
        : std::runtime_error("integration produced a non-finite state at step " + std::to_string(step)),
          step_{step} {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

struct StepDiagnostics {
    double V = 0.0;  // enclosing arc of the wrapped phases
    double r = 0.0;  // order-parameter magnitude
    std::vector<double> frequencies;  // d theta / dt for all n oscillators
    double disagreement = 0.0;        // || frequencies - reference * 1 ||_2
    double H = 0.0;                   // 1/2 |v|^2 + coupling potential
};

struct Trajectory {
    double h = 0.0;
    std::vector<double> times;
    std::vector<State> states;
    std::vector<StepDiagnostics> diagnostics;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] const State& final_state() const { return states.back(); }
};

struct IntegrateOptions {
    std::size_t record_every = 1;
    bool diagnostics = true;
};

/// Diagnostics of a state, given the frequency vector that applies to it.
inline StepDiagnostics diagnose(const NetworkSpec& spec, ModelRhs& rhs, std::span<const double> omega,
                                std::span<const double> y) {
    const std::size_t n = spec.n();
    std::vector<double> dy(y.size());
    rhs(omega, y, dy);
    StepDiagnostics d;
    auto theta = y.first(n);
    d.V = enclosing_arc_length(theta);
    d.r = order_parameter(theta).magnitude;
    d.frequencies.assign(dy.begin(), dy.begin() + static_cast<std::ptrdiff_t>(n));
    const double ref = rhs.reference_frequency(omega);
    double ss = 0.0;
    for (double f : d.frequencies) ss += (f - ref) * (f - ref);
    d.disagreement = std::sqrt(ss);
    double kinetic = 0.0;
    for (std::size_t i = n; i < y.size(); ++i) kinetic += 0.5 * y[i] * y[i];
    d.H = kinetic + coupling_potential(spec.K, theta);
    return d;
}

/// Number of steps of size h covering [0, T].
inline std::size_t step_count(double T, double h) {
    const double ratio = T / h;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(ratio));
}

/// Classical RK4 on the unwrapped phases with fixed step h. Piecewise
/// constant frequencies are held at their value inside each step, so a
/// switch at a grid time takes effect exactly on the following step.
inline Trajectory integrate(const NetworkSpec& spec, const State& initial, double T, double h,
                            const IntegrateOptions& opt = {}) {
    spec.validate();
    if (!(h > 0.0)) throw std::invalid_argument("integrate: step h must be positive");
    if (!(T >= h)) throw std::invalid_argument("integrate: horizon T must be at least h");
    if (initial.theta.size() != spec.n() || initial.thetadot.size() != spec.velocity_dim())
        throw std::invalid_argument("integrate: initial state dimensions do not match the network");
    if (opt.record_every == 0) throw std::invalid_argument("integrate: record_every must be positive");
    for (double ts : spec.profile.switch_times()) {
        const double k = ts / h;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            throw std::invalid_argument("integrate: step h must divide every switching interval");
    }

    const std::size_t steps = step_count(T, h);
    const std::size_t n = spec.n();
    ModelRhs rhs{spec};
    Rk4Workspace ws;
    std::vector<double> y = flatten(initial);
    std::vector<double> omega(n);
    std::vector<double> held(n);

    Trajectory traj;
    traj.h = h * static_cast<double>(opt.record_every);
    const std::size_t rows = steps / opt.record_every + 1;
    traj.times.reserve(rows);
    traj.states.reserve(rows);
    if (opt.diagnostics) traj.diagnostics.reserve(rows);

    auto record = [&](std::size_t k) {
        const double t = static_cast<double>(k) * h;
        traj.times.push_back(t);
        traj.states.push_back(unflatten(y, n));
        if (opt.diagnostics) {
            // Right-continuous frequencies at the recorded instant.
            spec.profile.evaluate_into(t, omega);
            traj.diagnostics.push_back(diagnose(spec, rhs, omega, y));
        }
    };

    record(0);
    const bool hold = spec.profile.piecewise_constant();
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        if (hold) spec.profile.evaluate_into(t + 0.5 * h, held);
        auto f = [&](double tau, std::span<const double> yy, std::span<double> dy) {
            if (hold) {
                rhs(held, yy, dy);
            } else {
                spec.profile.evaluate_into(tau, omega);
                rhs(omega, yy, dy);
            }
        };
        rk4_step(f, t, h, y, ws);
        for (double v : y)
            if (!std::isfinite(v)) throw IntegrationError(k + 1);
        if ((k + 1) % opt.record_every == 0) record(k + 1);
    }
    if (steps % opt.record_every != 0) record(steps);
    return traj;
}

/// Observed upper Dini derivative of the enclosing arc versus its bound
/// omega_m - omega_l - K sin V, for the unit-time-constant models.
struct ArcDerivative {
    double observed = 0.0;
    double bound = 0.0;
    double V = 0.0;
    std::size_t ccw_max_index = 0;
    std::size_t ccw_min_index = 0;
    bool tie = false;  // more than one oscillator at a boundary point
};

inline ArcDerivative arc_derivative_bound(const NetworkSpec& spec, const State& state, double t) {
    spec.validate();
    if (spec.model != Model::first_order && spec.model != Model::scaled)
        throw std::invalid_argument("arc_derivative_bound: only defined for unit time constants");
    PhaseVector theta{state.theta};
    const auto arc = enclosing_arc(theta);
    if (arc.length > pi) throw std::domain_error("arc_derivative_bound: phases do not fit in a half circle");

    ModelRhs rhs{spec};
    const auto omega = spec.profile.evaluate(t);
    const auto forcing = rhs.unit_forcing(omega);
    std::vector<double> dtheta(spec.n());
    rhs(omega, state.theta, dtheta);

    // Upper Dini derivative: fastest oscillator at the leading boundary
    // minus the slowest one at the trailing boundary.
    auto m = *std::max_element(arc.ccw_max.begin(), arc.ccw_max.end(),
                               [&](std::size_t a, std::size_t b) { return dtheta[a] < dtheta[b]; });
    auto l = *std::min_element(arc.ccw_min.begin(), arc.ccw_min.end(),
                               [&](std::size_t a, std::size_t b) { return dtheta[a] < dtheta[b]; });
    ArcDerivative out;
    out.V = arc.length;
    out.ccw_max_index = m;
    out.ccw_min_index = l;
    out.tie = arc.ccw_max.size() > 1 || arc.ccw_min.size() > 1;
    out.observed = dtheta[m] - dtheta[l];
    out.bound = forcing[m] - forcing[l] - spec.K * std::sin(arc.length);
    return out;
}

struct ConsensusDiagnostics {
    Eigen::MatrixXd weights;    // a_ij = (K/n) cos(theta_i - theta_j), zero diagonal
    Eigen::MatrixXd laplacian;  // symmetric, zero row sums
    double lambda2 = 0.0;       // algebraic connectivity
    double V = 0.0;
    bool connectivity_bound_holds = true;  // lambda2 >= K cos V whenever V < pi/2
    Eigen::VectorXd omega_rate;            // centered d omega / dt
    Eigen::VectorXd equilibrium_disagreement;  // L^+ times omega_rate
};

inline constexpr double pinv_zero_threshold = 1e-9;

/// Moore-Penrose inverse of a symmetric matrix via its eigendecomposition;
/// eigenvalues below the threshold in magnitude are treated as zero.
inline Eigen::MatrixXd symmetric_pseudo_inverse(const Eigen::MatrixXd& A, double zero = pinv_zero_threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (Eigen::Index k = 0; k < vals.size(); ++k)
        if (std::abs(vals(k)) >= zero) out += (1.0 / vals(k)) * vecs.col(k) * vecs.col(k).transpose();
    return out;
}

inline ConsensusDiagnostics consensus_diagnostics(const NetworkSpec& spec, const State& state, double t) {
    const std::size_t n = spec.n();
    if (state.theta.size() != n) throw std::invalid_argument("consensus_diagnostics: dimension mismatch");
    ConsensusDiagnostics d;
    d.laplacian = cosine_laplacian(spec.K, state.theta);
    d.weights = -d.laplacian;
    d.weights.diagonal().setZero();
    d.V = enclosing_arc_length(state.theta);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.laplacian, Eigen::EigenvaluesOnly);
    d.lambda2 = n >= 2 ? es.eigenvalues()(1) : 0.0;
    if (d.V < pi / 2.0) d.connectivity_bound_holds = d.lambda2 >= spec.K * std::cos(d.V) - 1e-12 * spec.K;

    const auto rate = spec.profile.rate_of_change(t);
    d.omega_rate = Eigen::Map<const Eigen::VectorXd>(rate.data(), static_cast<Eigen::Index>(n));
    d.omega_rate.array() -= d.omega_rate.mean();
    if (spec.profile.time_invariant()) {
        d.equilibrium_disagreement = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    } else {
        d.equilibrium_disagreement = symmetric_pseudo_inverse(d.laplacian) * d.omega_rate;
    }
    return d;
}

}  // namespace kuramoto
