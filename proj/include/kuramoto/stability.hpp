#pragma once

// Equilibria of the scaled model, the Jacobian of the H_lambda family that
// interpolates between gradient and dissipative-Hamiltonian dynamics, matrix
// inertia, and the checks that equilibria and inertia do not depend on
// lambda or on the inertia matrix M.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kuramoto/dynamics.hpp"
#include "kuramoto/frequency.hpp"
#include "kuramoto/torus.hpp"

namespace kuramoto {

/// Eigenvalue counts with negative, (numerically) zero, and positive real part.
struct Inertia {
    std::size_t stable = 0;
    std::size_t center = 0;
    std::size_t unstable = 0;

    friend bool operator==(const Inertia&, const Inertia&) = default;
};

inline std::string to_string(const Inertia& in) {
    return "(" + std::to_string(in.stable) + ", " + std::to_string(in.center) + ", " + std::to_string(in.unstable) +
           ")";
}

/// Default threshold 1e-8 * ||A||_2.
inline double default_inertia_tolerance(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return 1e-8 * svd.singularValues()(0);
}

inline Inertia inertia(const Eigen::MatrixXd& A, double tol) {
    if (A.rows() != A.cols()) throw std::invalid_argument("inertia: matrix must be square");
    Inertia out;
    if (A.size() == 0) return out;
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    for (const auto& ev : es.eigenvalues()) {
        if (ev.real() < -tol)
            ++out.stable;
        else if (ev.real() > tol)
            ++out.unstable;
        else
            ++out.center;
    }
    return out;
}

inline Inertia inertia(const Eigen::MatrixXd& A) { return inertia(A, default_inertia_tolerance(A)); }

/// Eigenvalues sorted by real part, then imaginary part.
inline std::vector<std::complex<double>> sorted_eigenvalues(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return ev;
}

// ---------------------------------------------------------------------------
// H_lambda family

/// State x = (x1, x2, x3): n1 first-order phases, n2 second-order phases and
/// their n2 velocities. The potential is
/// H = 1/2 |x3|^2 - (K/n) sum_{i<j} cos(theta_i - theta_j) over the n1 + n2
/// phases (x1, x2).
struct HLambdaSpec {
    double lambda = 0.0;
    double K = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::vector<double> D1, D2, M;
    std::vector<double> F1, F2;

    [[nodiscard]] std::size_t phases() const noexcept { return n1 + n2; }
    [[nodiscard]] std::size_t dim() const noexcept { return n1 + 2 * n2; }

    void validate() const {
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("HLambdaSpec: lambda must lie in [0, 1]");
        if (!(K > 0.0)) throw std::invalid_argument("HLambdaSpec: K must be positive");
        if (phases() < 1) throw std::invalid_argument("HLambdaSpec: need at least one oscillator");
        if (D1.size() != n1 || F1.size() != n1 || D2.size() != n2 || M.size() != n2 || F2.size() != n2)
            throw std::invalid_argument("HLambdaSpec: block sizes do not match n1, n2");
        for (const auto* v : {&D1, &D2, &M})
            for (double d : *v)
                if (!(d > 0.0)) throw std::invalid_argument("HLambdaSpec: D1, D2, M must be positive");
    }
};

/// H_lambda view of a network, in the frame rotating at omega_sync, so the
/// forcing is the scaled frequencies. Oscillators 0..m-1 form x2.
inline HLambdaSpec hlambda_spec(const NetworkSpec& net, double lambda, double inertia_scale = 1.0) {
    net.validate();
    const std::size_t n = net.n();
    const std::size_t m = net.m();
    const auto omega = net.profile.evaluate(0.0);
    const auto wbar = scaled_frequencies(omega, net.dd.damping);
    HLambdaSpec hs;
    hs.lambda = lambda;
    hs.K = net.K;
    hs.n1 = n - m;
    hs.n2 = m;
    for (std::size_t i = 0; i < m; ++i) {
        hs.D2.push_back(net.dd.damping[i]);
        hs.M.push_back(net.dd.inertia[i] * inertia_scale);
        hs.F2.push_back(wbar[i]);
    }
    for (std::size_t i = m; i < n; ++i) {
        hs.D1.push_back(net.dd.damping[i]);
        hs.F1.push_back(wbar[i]);
    }
    hs.validate();
    return hs;
}

/// Network-ordered phases and velocities to x = (x1, x2, x3).
inline std::vector<double> to_hlambda_coordinates(std::span<const double> theta, std::span<const double> velocity,
                                                  std::size_t m) {
    std::vector<double> x;
    x.reserve(theta.size() + velocity.size());
    x.insert(x.end(), theta.begin() + static_cast<std::ptrdiff_t>(m), theta.end());
    x.insert(x.end(), theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(m));
    x.insert(x.end(), velocity.begin(), velocity.end());
    return x;
}

/// Inverse of to_hlambda_coordinates.
inline State from_hlambda_coordinates(std::span<const double> x, std::size_t n1, std::size_t n2) {
    State s;
    s.theta.assign(x.begin() + static_cast<std::ptrdiff_t>(n1), x.begin() + static_cast<std::ptrdiff_t>(n1 + n2));
    s.theta.insert(s.theta.end(), x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n1));
    s.thetadot.assign(x.begin() + static_cast<std::ptrdiff_t>(n1 + n2), x.end());
    return s;
}

inline double potential(const HLambdaSpec& hs, std::span<const double> x) {
    double kinetic = 0.0;
    for (std::size_t i = hs.phases(); i < hs.dim(); ++i) kinetic += 0.5 * x[i] * x[i];
    return kinetic + coupling_potential(hs.K, x.first(hs.phases()));
}

inline Eigen::VectorXd potential_gradient(const HLambdaSpec& hs, std::span<const double> x) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(hs.dim()));
    std::vector<double> c(hs.phases());
    coupling_terms_pairwise(hs.K, x.first(hs.phases()), c);
    for (std::size_t i = 0; i < hs.phases(); ++i) g(static_cast<Eigen::Index>(i)) = c[i];
    for (std::size_t i = hs.phases(); i < hs.dim(); ++i) g(static_cast<Eigen::Index>(i)) = x[i];
    return g;
}

inline Eigen::MatrixXd potential_hessian(const HLambdaSpec& hs, std::span<const double> x) {
    const auto p = static_cast<Eigen::Index>(hs.phases());
    const auto d = static_cast<Eigen::Index>(hs.dim());
    Eigen::MatrixXd Hm = Eigen::MatrixXd::Zero(d, d);
    Hm.topLeftCorner(p, p) = cosine_laplacian(hs.K, x.first(hs.phases()));
    Hm.bottomRightCorner(d - p, d - p).setIdentity();
    return Hm;
}

/// F = (F1, F2, 0).
inline Eigen::VectorXd forcing_vector(const HLambdaSpec& hs) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hs.dim()));
    for (std::size_t i = 0; i < hs.n1; ++i) F(static_cast<Eigen::Index>(i)) = hs.F1[i];
    for (std::size_t i = 0; i < hs.n2; ++i) F(static_cast<Eigen::Index>(hs.n1 + i)) = hs.F2[i];
    return F;
}

/// ||grad H(x) - F||_inf.
inline double equilibrium_residual(const HLambdaSpec& hs, std::span<const double> x) {
    return (potential_gradient(hs, x) - forcing_vector(hs)).lpNorm<Eigen::Infinity>();
}

/// The H_lambda vector field written out block by block.
inline std::vector<double> hlambda_vector_field(const HLambdaSpec& hs, std::span<const double> x) {
    hs.validate();
    if (x.size() != hs.dim()) throw std::invalid_argument("hlambda_vector_field: state dimension mismatch");
    const Eigen::VectorXd g = potential_gradient(hs, x);
    const double lam = hs.lambda;
    std::vector<double> dx(hs.dim());
    for (std::size_t i = 0; i < hs.n1; ++i) dx[i] = (hs.F1[i] - g(static_cast<Eigen::Index>(i))) / hs.D1[i];
    for (std::size_t i = 0; i < hs.n2; ++i) {
        const double g2 = g(static_cast<Eigen::Index>(hs.n1 + i));
        const double g3 = g(static_cast<Eigen::Index>(hs.phases() + i));
        dx[hs.n1 + i] = lam / hs.D2[i] * (hs.F2[i] - g2) + (1.0 - lam) * g3;
        dx[hs.phases() + i] = ((1.0 - lam) * (hs.F2[i] - g2) - hs.D2[i] * g3) / hs.M[i];
    }
    return dx;
}

/// S_lambda * blkdiag(-I, -M) * Hessian(H) at an equilibrium x*.
inline Eigen::MatrixXd jacobian_hlambda(const HLambdaSpec& hs, std::span<const double> x, double tol = 1e-8) {
    hs.validate();
    if (x.size() != hs.dim()) throw std::invalid_argument("jacobian_hlambda: state dimension mismatch");
    const double res = equilibrium_residual(hs, x);
    if (!(res <= tol))
        throw std::invalid_argument("jacobian_hlambda: state is not an equilibrium (residual " + std::to_string(res) +
                                    ")");
    const auto n1 = static_cast<Eigen::Index>(hs.n1);
    const auto n2 = static_cast<Eigen::Index>(hs.n2);
    const auto p = n1 + n2;
    const auto d = p + n2;
    const double lam = hs.lambda;

    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < n1; ++i) S(i, i) = 1.0 / hs.D1[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < n2; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double Mi = hs.M[k];
        const double Di = hs.D2[k];
        S(n1 + i, n1 + i) = lam / Di;
        S(n1 + i, p + i) = (lam - 1.0) / Mi;
        S(p + i, n1 + i) = (1.0 - lam) / Mi;
        S(p + i, p + i) = Di / (Mi * Mi);
    }
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(d, -1.0);
    for (Eigen::Index i = 0; i < n2; ++i) scale(p + i) = -hs.M[static_cast<std::size_t>(i)];
    return S * (scale.asDiagonal() * potential_hessian(hs, x));
}

/// Central differences of an arbitrary vector field, column by column.
template <class F>
Eigen::MatrixXd finite_difference_jacobian(F&& f, std::span<const double> x, double h = 1e-5) {
    const auto d = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd J(d, d);
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> xm(x.begin(), x.end());
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto k = static_cast<std::size_t>(j);
        xp[k] = x[k] + h;
        xm[k] = x[k] - h;
        const std::vector<double> fp = f(std::span<const double>(xp));
        const std::vector<double> fm = f(std::span<const double>(xm));
        for (Eigen::Index i = 0; i < d; ++i)
            J(i, j) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
        xp[k] = x[k];
        xm[k] = x[k];
    }
    return J;
}

// ---------------------------------------------------------------------------
// Equilibria

struct EquilibriumResult {
    bool found = false;
    std::vector<double> theta;  // grounded: theta_{n-1} = 0
    double residual = 0.0;      // ||omega_bar - coupling(theta)||_inf
    std::size_t iterations = 0;
    std::string method;  // "newton", "simulation+newton", or "none"
    bool stable = false;

    [[nodiscard]] PhaseVector phases() const { return PhaseVector{theta}; }
};

inline constexpr double equilibrium_tolerance = 1e-10;

inline double scaled_residual(double K, std::span<const double> wbar, std::span<const double> theta) {
    std::vector<double> c(theta.size());
    coupling_terms_pairwise(K, theta, c);
    double r = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) r = std::max(r, std::abs(wbar[i] - c[i]));
    return r;
}

namespace detail {

inline void ground(std::vector<double>& theta) {
    const double ref = theta.back();
    for (double& x : theta) x -= ref;
}

/// Grounded Newton iteration on wbar = coupling(theta) with backtracking.
/// Runs until a step stops improving the residual, so accepted equilibria sit
/// at rounding level; the H_lambda field divides this residual by M.
inline bool newton_polish(double K, std::span<const double> wbar, std::vector<double>& theta, std::size_t& iters,
                          std::size_t max_iter = 100) {
    const std::size_t n = theta.size();
    ground(theta);
    if (n == 1) return true;
    const auto g = static_cast<Eigen::Index>(n - 1);
    double res = scaled_residual(K, wbar, theta);
    for (std::size_t it = 0; it < max_iter && res > 0.0; ++it) {
        ++iters;
        std::vector<double> c(n);
        coupling_terms_pairwise(K, theta, c);
        Eigen::VectorXd f(g);
        for (Eigen::Index i = 0; i < g; ++i) f(i) = wbar[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)];
        const Eigen::MatrixXd L = cosine_laplacian(K, theta).topLeftCorner(g, g);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
        if (!lu.isInvertible()) return false;
        const Eigen::VectorXd step = lu.solve(f);
        double alpha = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt, alpha *= 0.5) {
            std::vector<double> trial(theta);
            for (Eigen::Index i = 0; i < g; ++i) trial[static_cast<std::size_t>(i)] += alpha * step(i);
            const double r = scaled_residual(K, wbar, trial);
            if (r < res) {
                theta = std::move(trial);
                res = r;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    return res < equilibrium_tolerance;
}

/// Stable iff the grounded Laplacian is positive definite.
inline bool grounded_stable(double K, std::span<const double> theta) {
    const std::size_t n = theta.size();
    if (n == 1) return true;
    const auto g = static_cast<Eigen::Index>(n - 1);
    const Eigen::MatrixXd L = cosine_laplacian(K, theta).topLeftCorner(g, g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) > 1e-9 * std::max(1.0, K);
}

}  // namespace detail

/// Stable phase-locked equilibrium of the scaled model (frame rotating at
/// omega_sync), in grounded coordinates.
inline EquilibriumResult find_equilibrium(const NetworkSpec& net) {
    net.validate();
    const std::size_t n = net.n();
    const auto omega = net.profile.evaluate(0.0);
    const auto wbar = scaled_frequencies(omega, net.dd.damping);
    double sum = 0.0;
    double scale = 0.0;
    for (double w : wbar) {
        sum += w;
        scale += std::abs(w);
    }
    if (std::abs(sum) > 1e-9 * std::max(1.0, scale))
        throw std::logic_error("find_equilibrium: scaled frequencies must sum to zero");

    EquilibriumResult out;
    std::vector<double> theta(n, 0.0);
    if (detail::newton_polish(net.K, wbar, theta, out.iterations) && detail::grounded_stable(net.K, theta)) {
        out.found = true;
        out.stable = true;
        out.method = "newton";
        out.theta = theta;
        out.residual = scaled_residual(net.K, wbar, theta);
        return out;
    }

    // Fallback: relax the scaled first-order model from phase sync, then polish.
    NetworkSpec sim{Model::first_order, FrequencyProfile::constant(wbar), net.K, DampingInertiaSpec::unit(n), {}};
    const double h = std::min(1e-2, 0.1 / net.K);
    std::vector<double> relaxed(n, 0.0);
    try {
        auto traj = integrate(sim, State{relaxed, {}}, 200.0 / net.K, h, {.record_every = 1000, .diagnostics = false});
        relaxed = traj.final_state().theta;
    } catch (const IntegrationError&) {
        relaxed.assign(n, 0.0);
    }
    std::size_t iters = 0;
    const bool ok = detail::newton_polish(net.K, wbar, relaxed, iters);
    out.iterations += iters;
    out.residual = scaled_residual(net.K, wbar, relaxed);
    if (ok && detail::grounded_stable(net.K, relaxed)) {
        out.found = true;
        out.stable = true;
        out.method = "simulation+newton";
        out.theta = relaxed;
        return out;
    }
    out.method = "none";
    out.theta = relaxed;
    return out;
}

class EquilibriumNotFound : public std::runtime_error {
public:
    explicit EquilibriumNotFound(double residual)
        : std::runtime_error("no stable phase-locked equilibrium found (residual " + std::to_string(residual) + ")"),
          residual_{residual} {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct StabilityReport {
    std::vector<double> equilibrium;  // grounded phases, network order
    double residual = 0.0;
    double lambda = 0.0;
    Eigen::MatrixXd jacobian;
    std::vector<std::complex<double>> eigenvalues;
    Inertia inertia;
    Inertia hessian_inertia;  // inertia of -Hessian(H)
    std::size_t zero_dim = 0;
    bool hyperbolic = false;  // exactly one center eigenvalue (the rotation mode)
};

/// Equilibrium with zero velocities, in H_lambda coordinates.
inline std::vector<double> equilibrium_state(const HLambdaSpec& hs, std::span<const double> theta, std::size_t m) {
    std::vector<double> v(hs.n2, 0.0);
    return to_hlambda_coordinates(theta, v, m);
}

inline StabilityReport stability_report(const NetworkSpec& net, double lambda = 0.0) {
    const auto eq = find_equilibrium(net);
    if (!eq.found) throw EquilibriumNotFound(eq.residual);
    const auto hs = hlambda_spec(net, lambda);
    const auto x = equilibrium_state(hs, eq.theta, net.m());
    StabilityReport r;
    r.equilibrium = eq.theta;
    r.residual = eq.residual;
    r.lambda = lambda;
    r.jacobian = jacobian_hlambda(hs, x);
    r.eigenvalues = sorted_eigenvalues(r.jacobian);
    r.inertia = inertia(r.jacobian);
    const Eigen::MatrixXd negH = -potential_hessian(hs, x);
    r.hessian_inertia = inertia(negH);
    r.zero_dim = r.inertia.center;
    r.hyperbolic = r.inertia.center == 1;
    return r;
}

// ---------------------------------------------------------------------------
// Invariance across lambda and M

struct ConjugacyPoint {
    double lambda = 0.0;
    double inertia_scale = 1.0;
    double residual = 0.0;  // ||H_lambda(x*)||_inf
    Inertia inertia;
};

struct ConjugacyReport {
    std::vector<double> equilibrium;
    std::vector<ConjugacyPoint> points;
    Inertia hessian_inertia;
    double max_residual = 0.0;
    bool equilibria_agree = false;
    bool inertia_invariant = false;
    bool matches_hessian = false;
    bool center_is_rotation = false;  // null space spanned by (1_n, 0_m)
    bool degenerate = false;          // more than one center eigenvalue; not classified

    [[nodiscard]] bool passed() const noexcept {
        return equilibria_agree && inertia_invariant && matches_hessian && center_is_rotation;
    }
};

inline constexpr double conjugacy_residual_tolerance = 1e-10;

/// Cosine of the angle between the numerical null vector of J and the
/// rotation direction (1, ..., 1, 0, ..., 0).
inline double rotation_alignment(const Eigen::MatrixXd& J, std::size_t phases) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const Eigen::VectorXd v = svd.matrixV().col(J.cols() - 1);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(J.cols());
    u.head(static_cast<Eigen::Index>(phases)).setOnes();
    return std::abs(v.dot(u)) / (v.norm() * u.norm());
}

inline ConjugacyReport conjugacy_check(const NetworkSpec& net, std::span<const double> inertia_scales,
                                       std::span<const double> lambdas) {
    if (inertia_scales.empty() || lambdas.empty()) throw std::invalid_argument("conjugacy_check: empty grid");
    const auto eq = find_equilibrium(net);
    if (!eq.found) throw EquilibriumNotFound(eq.residual);

    ConjugacyReport rep;
    rep.equilibrium = eq.theta;
    rep.equilibria_agree = true;
    rep.inertia_invariant = true;
    rep.center_is_rotation = true;
    {
        const auto hs = hlambda_spec(net, 1.0);
        const auto x = equilibrium_state(hs, eq.theta, net.m());
        const Eigen::MatrixXd negH = -potential_hessian(hs, x);
        rep.hessian_inertia = inertia(negH);
    }
    for (double s : inertia_scales) {
        for (double lam : lambdas) {
            const auto hs = hlambda_spec(net, lam, s);
            const auto x = equilibrium_state(hs, eq.theta, net.m());
            ConjugacyPoint pt;
            pt.lambda = lam;
            pt.inertia_scale = s;
            for (double v : hlambda_vector_field(hs, x)) pt.residual = std::max(pt.residual, std::abs(v));
            const Eigen::MatrixXd J = jacobian_hlambda(hs, x);
            pt.inertia = inertia(J);
            rep.max_residual = std::max(rep.max_residual, pt.residual);
            if (pt.residual >= conjugacy_residual_tolerance) rep.equilibria_agree = false;
            if (!rep.points.empty() && !(pt.inertia == rep.points.front().inertia)) rep.inertia_invariant = false;
            if (pt.inertia.center != 1) {
                rep.degenerate = true;
                rep.center_is_rotation = false;
            } else if (rotation_alignment(J, hs.phases()) < 1.0 - 1e-8) {
                rep.center_is_rotation = false;
            }
            rep.points.push_back(pt);
        }
    }
    rep.matches_hessian = rep.inertia_invariant && rep.points.front().inertia == rep.hessian_inertia;
    return rep;
}

// ---------------------------------------------------------------------------
// Multi-rate synchronization conditions

struct MultirateSyncReport {
    double omega_sync = 0.0;
    double K_critical = 0.0;  // spread of the scaled frequencies
    bool frequency_sync_guaranteed = false;  // K > K_critical
    bool phase_sync_admissible = false;      // omega = D * s for a common s
    double s_bar = 0.0;
    double weighted_phase = 0.0;  // sum D_i theta_i(0) / sum D_i
};

inline constexpr double phase_sync_tolerance = 1e-12;

/// With nonzero initial velocities the conserved quantity also carries
/// sum M_i (thetadot_i(0) - s); the weighted phase includes that term.
inline MultirateSyncReport multirate_sync_report(const NetworkSpec& net, std::span<const double> theta0 = {},
                                                 std::span<const double> thetadot0 = {}) {
    net.validate();
    const auto omega = net.profile.evaluate(0.0);
    const auto& D = net.dd.damping;
    MultirateSyncReport r;
    r.omega_sync = omega_sync(omega, D);
    const auto wbar = scaled_frequencies(omega, D);
    const auto st = omega_stats(wbar);
    r.K_critical = st.max - st.min;
    r.frequency_sync_guaranteed = net.K > r.K_critical;
    double dev = 0.0;
    for (std::size_t i = 0; i < omega.size(); ++i) dev = std::max(dev, std::abs(omega[i] / D[i] - r.omega_sync));
    r.phase_sync_admissible = dev < phase_sync_tolerance;
    r.s_bar = r.omega_sync;
    if (!theta0.empty()) {
        if (theta0.size() != net.n()) throw std::invalid_argument("multirate_sync_report: theta0 size mismatch");
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < theta0.size(); ++i) {
            num += D[i] * theta0[i];
            den += D[i];
        }
        for (std::size_t i = 0; i < thetadot0.size() && i < net.m(); ++i)
            num += net.dd.inertia[i] * (thetadot0[i] - r.s_bar);
        r.weighted_phase = num / den;
    }
    return r;
}

struct PhaseSyncSampling {
    std::size_t samples = 0;
    std::size_t converged = 0;
    std::size_t near_equilibrium = 0;  // non-converged samples resting at a critical point
    std::size_t unexplained = 0;
};

/// Random initial phases in [-pi, pi), zero relative velocities, integrated in
/// the frame rotating at s_bar. A sample converges when its final arc is
/// below arc_tol; otherwise it must rest where the coupling gradient vanishes.
inline PhaseSyncSampling sample_phase_sync(const NetworkSpec& net, std::size_t samples, std::uint64_t seed,
                                           double T, double h, double arc_tol = 1e-6, double grad_tol = 1e-4) {
    const auto rep = multirate_sync_report(net);
    if (!rep.phase_sync_admissible)
        throw std::invalid_argument("sample_phase_sync: natural frequencies are not proportional to damping");
    NetworkSpec spec = net;
    spec.frame = Frame{true, rep.s_bar};
    PhaseSyncSampling out;
    out.samples = samples;
    for (std::size_t s = 0; s < samples; ++s) {
        std::mt19937_64 rng(mix_seed(seed ^ s));
        State x0;
        for (std::size_t i = 0; i < spec.n(); ++i) x0.theta.push_back(-pi + two_pi * unit_uniform(rng));
        x0.thetadot.assign(spec.velocity_dim(), 0.0);
        const auto traj = integrate(spec, x0, T, h, {.record_every = step_count(T, h), .diagnostics = false});
        const auto& th = traj.final_state().theta;
        if (enclosing_arc_length(th) < arc_tol) {
            ++out.converged;
            continue;
        }
        std::vector<double> c(th.size());
        coupling_terms_pairwise(spec.K, th, c);
        double g = 0.0;
        for (double v : c) g = std::max(g, std::abs(v));
        if (g < grad_tol)
            ++out.near_equilibrium;
        else
            ++out.unexplained;
    }
    return out;
}

}  // namespace kuramoto
