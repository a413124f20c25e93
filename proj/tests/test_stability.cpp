#include <catch_amalgamated.hpp>

#include <random>

#include "kuramoto/bounds.hpp"
#include "kuramoto/stability.hpp"

using namespace kuramoto;
using Catch::Matchers::WithinAbs;

namespace {

NetworkSpec multi_rate(std::vector<double> omega, std::vector<double> D, std::vector<double> M, double K) {
    const std::size_t m = M.size();
    return NetworkSpec{Model::multi_rate, FrequencyProfile::constant(std::move(omega)), K,
                       DampingInertiaSpec{std::move(D), std::move(M), m}, {}};
}

/// Random multi-rate network coupled at twice its exact threshold.
NetworkSpec random_network(std::mt19937_64& rng) {
    const std::size_t n = 2 + rng() % 7;
    const std::size_t m = rng() % (n + 1);
    std::vector<double> omega(n), D(n), M(m);
    for (std::size_t i = 0; i < n; ++i) {
        omega[i] = -1.0 + 2.0 * unit_uniform(rng);
        D[i] = 0.2 + 2.0 * unit_uniform(rng);
    }
    for (double& x : M) x = 0.05 + 3.0 * unit_uniform(rng);
    const auto wbar = scaled_frequencies(omega, D);
    const double K = 2.0 * exact_implicit_coupling(wbar).value + 0.1;
    return multi_rate(std::move(omega), std::move(D), std::move(M), K);
}

}  // namespace

TEST_CASE("inertia of simple matrices") {
    CHECK(inertia(-Eigen::MatrixXd::Identity(3, 3)) == Inertia{3, 0, 0});
    CHECK(inertia(Eigen::MatrixXd::Zero(2, 2)) == Inertia{0, 2, 0});
    Eigen::MatrixXd A(2, 2);
    A << 0.0, 1.0, -1.0, 0.0;  // rotation: purely imaginary pair
    CHECK(inertia(A) == Inertia{0, 2, 0});
    A << 1.0, 5.0, 0.0, -2.0;
    CHECK(inertia(A) == Inertia{1, 0, 1});
    CHECK(to_string(Inertia{5, 1, 0}) == "(5, 1, 0)");
    CHECK_THROWS_AS(inertia(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST_CASE("H_lambda coordinates round-trip") {
    const std::vector<double> theta{0.1, 0.2, 0.3, 0.4};
    const std::vector<double> v{5.0, 6.0};
    const auto x = to_hlambda_coordinates(theta, v, 2);
    CHECK(x == std::vector<double>{0.3, 0.4, 0.1, 0.2, 5.0, 6.0});
    const auto s = from_hlambda_coordinates(x, 2, 2);
    CHECK(s.theta == theta);
    CHECK(s.thetadot == v);
}

TEST_CASE("gradient flow Jacobian is minus the Hessian") {
    const auto net = first_order_network(FrequencyProfile::constant({-0.2, 0.1, 0.1}), 1.5);
    const auto eq = find_equilibrium(net);
    REQUIRE(eq.found);
    const auto hs = hlambda_spec(net, 1.0);
    const auto x = equilibrium_state(hs, eq.theta, 0);
    const Eigen::MatrixXd J = jacobian_hlambda(hs, x);
    CHECK((J + potential_hessian(hs, x)).norm() < 1e-15);
}

TEST_CASE("identical oscillators: eigenvalues 0, -K, -K") {
    const auto rep = stability_report(first_order_network(FrequencyProfile::constant({0.4, 0.4, 0.4}), 1.0), 1.0);
    REQUIRE(rep.eigenvalues.size() == 3);
    CHECK_THAT(rep.eigenvalues[0].real(), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(rep.eigenvalues[1].real(), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(rep.eigenvalues[2].real(), WithinAbs(0.0, 1e-12));
    CHECK(rep.inertia == Inertia{2, 1, 0});
    CHECK(rep.hyperbolic);
}

TEST_CASE("three second-order oscillators have inertia (5, 1, 0)") {
    const auto net = multi_rate({0.1, -0.1, 0.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, 2.0);
    for (double lam : {0.0, 0.5, 1.0}) CHECK(stability_report(net, lam).inertia == Inertia{5, 1, 0});
}

TEST_CASE("find_equilibrium examples") {
    auto eq = find_equilibrium(first_order_network(FrequencyProfile::constant({-0.5, 0.5}), 2.0));
    REQUIRE(eq.found);
    CHECK(eq.method == "newton");
    CHECK(eq.theta[1] == 0.0);
    CHECK_THAT(eq.theta[0], WithinAbs(-pi / 6.0, 1e-10));
    CHECK(eq.residual < 1e-10);

    eq = find_equilibrium(first_order_network(FrequencyProfile::constant({0.0, 0.0, 0.0}), 1.0));
    REQUIRE(eq.found);
    CHECK(eq.theta == std::vector<double>{0.0, 0.0, 0.0});

    // Below the exact threshold 1.7044 there is no phase-locked state.
    eq = find_equilibrium(first_order_network(FrequencyProfile::constant({-1.0, 0.0, 1.0}), 1.6));
    CHECK_FALSE(eq.found);
    CHECK(eq.method == "none");
    CHECK_THROWS_AS(stability_report(first_order_network(FrequencyProfile::constant({-1.0, 0.0, 1.0}), 1.6)),
                    EquilibriumNotFound);

    eq = find_equilibrium(first_order_network(FrequencyProfile::constant({-1.0, 0.0, 1.0}), 1.75));
    CHECK(eq.found);
    CHECK(eq.residual < 1e-10);
}

TEST_CASE("found equilibria satisfy the locking equations") {
    std::mt19937_64 rng(41);
    for (int k = 0; k < 50; ++k) {
        const auto net = random_network(rng);
        const auto eq = find_equilibrium(net);
        REQUIRE(eq.found);
        const auto wbar = scaled_frequencies(net.profile.evaluate(0.0), net.dd.damping);
        std::vector<double> c(net.n());
        coupling_terms(net.K, eq.theta, c);
        for (std::size_t i = 0; i < net.n(); ++i) CHECK_THAT(c[i], WithinAbs(wbar[i], 1e-9));
        CHECK(enclosing_arc_length(eq.theta) < pi / 2.0 + 1e-9);
    }
}

TEST_CASE("analytic Jacobian matches finite differences of the H_lambda field") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 30; ++k) {
        const auto net = random_network(rng);
        const auto eq = find_equilibrium(net);
        REQUIRE(eq.found);
        for (double lam : {0.0, 0.3, 1.0}) {
            const auto hs = hlambda_spec(net, lam);
            const auto x = equilibrium_state(hs, eq.theta, net.m());
            const Eigen::MatrixXd J = jacobian_hlambda(hs, x);
            const Eigen::MatrixXd Jfd =
                finite_difference_jacobian([&](std::span<const double> y) { return hlambda_vector_field(hs, y); }, x);
            CHECK((J - Jfd).lpNorm<Eigen::Infinity>() < 1e-6);
        }
    }
}

TEST_CASE("H_0 is the multi-rate model in the frame rotating at omega_sync") {
    std::mt19937_64 rng(43);
    for (int k = 0; k < 30; ++k) {
        auto net = random_network(rng);
        const auto eq = find_equilibrium(net);
        REQUIRE(eq.found);
        const std::size_t n = net.n();
        const std::size_t m = net.m();
        const auto omega = net.profile.evaluate(0.0);
        net.frame = Frame{true, omega_sync(omega, net.dd.damping)};
        ModelRhs rhs{net};
        // Network-ordered field, reordered to (x1, x2, x3).
        auto field = [&](std::span<const double> x) {
            const auto s = from_hlambda_coordinates(x, n - m, m);
            const auto y = flatten(s);
            std::vector<double> dy(y.size());
            rhs(omega, y, dy);
            return to_hlambda_coordinates(std::span<const double>(dy).first(n), std::span<const double>(dy).subspan(n), m);
        };
        const auto hs = hlambda_spec(net, 0.0);
        const auto x = equilibrium_state(hs, eq.theta, m);
        for (double v : field(x)) CHECK_THAT(v, WithinAbs(0.0, 1e-9));
        std::vector<double> probe(x);
        for (double& p : probe) p += 0.3 * (unit_uniform(rng) - 0.5);
        const auto a = field(probe);
        const auto b = hlambda_vector_field(hs, probe);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK_THAT(a[i], WithinAbs(b[i], 1e-12));
        const Eigen::MatrixXd Jfd = finite_difference_jacobian(field, x);
        CHECK((jacobian_hlambda(hs, x) - Jfd).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("inertia is invariant in lambda and M and equals that of -Hessian(H)") {
    std::mt19937_64 rng(44);
    const std::vector<double> scales{0.1, 1.0, 10.0};
    const std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
    for (int k = 0; k < 100; ++k) {
        const auto net = random_network(rng);
        const auto rep = conjugacy_check(net, scales, lambdas);
        CHECK(rep.passed());
        CHECK(rep.max_residual < 1e-9);
        const std::size_t dim = net.n() + net.m();
        CHECK(rep.hessian_inertia == Inertia{dim - 1, 1, 0});
        CHECK_FALSE(rep.degenerate);
    }
}

TEST_CASE("inertia invariance also holds at a saddle") {
    // Two oscillators locked at 5 pi / 6 instead of pi / 6.
    const auto net = multi_rate({-0.5, 0.5}, {1.0, 1.0}, {0.7}, 2.0);
    const std::vector<double> theta{-5.0 * pi / 6.0, 0.0};
    for (double s : {0.1, 1.0, 10.0}) {
        for (double lam : {0.0, 0.5, 1.0}) {
            const auto hs = hlambda_spec(net, lam, s);
            const auto x = equilibrium_state(hs, theta, 1);
            CHECK(equilibrium_residual(hs, x) < 1e-12);
            CHECK(inertia(jacobian_hlambda(hs, x)) == Inertia{1, 1, 1});
            const Eigen::MatrixXd negH = -potential_hessian(hs, x);
            CHECK(inertia(negH) == Inertia{1, 1, 1});
        }
    }
}

TEST_CASE("Jacobian rejects states that are not equilibria") {
    const auto net = multi_rate({-0.5, 0.5}, {1.0, 1.0}, {0.7}, 2.0);
    const auto hs = hlambda_spec(net, 0.5);
    CHECK_THROWS_AS(jacobian_hlambda(hs, std::vector<double>{0.3, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(jacobian_hlambda(hs, std::vector<double>{0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(hlambda_spec(net, 1.5), std::invalid_argument);
}

TEST_CASE("multi-rate synchronization report") {
    auto net = multi_rate({2.0, 6.0}, {1.0, 3.0}, {0.5}, 1.0);
    auto r = multirate_sync_report(net);
    CHECK(r.phase_sync_admissible);
    CHECK(r.s_bar == 2.0);
    CHECK(r.omega_sync == 2.0);
    CHECK(r.K_critical == 0.0);
    CHECK(r.frequency_sync_guaranteed);

    net = multi_rate({-1.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, {}, 2.5);
    r = multirate_sync_report(net);
    CHECK(r.K_critical == 2.0);
    CHECK(r.frequency_sync_guaranteed);
    CHECK_FALSE(r.phase_sync_admissible);

    net = multi_rate({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, {}, 1.0);
    r = multirate_sync_report(net, std::vector<double>{0.2, 0.3, 0.2});
    CHECK_THAT(r.weighted_phase, WithinAbs(1.4 / 6.0, 1e-15));
    CHECK_THROWS_AS(multirate_sync_report(net, std::vector<double>{0.2}), std::invalid_argument);
}

TEST_CASE("phase sync converges to the weighted initial phase") {
    // omega = D s with s = 0.5; the network rotates at s and settles at the weighted phase.
    auto net = multi_rate({0.5, 1.0, 0.25, 0.75}, {1.0, 2.0, 0.5, 1.5}, {0.8, 1.2}, 1.0);
    const std::vector<double> th0{0.4, -0.3, 0.9, 0.1};
    const std::vector<double> v0{0.5, 0.5};
    const auto r = multirate_sync_report(net, th0, v0);
    const auto traj = integrate(net, State{th0, v0}, 60.0, 1e-2, {6000, false});
    for (std::size_t i = 0; i < 4; ++i)
        CHECK_THAT(traj.final_state().theta[i] - 0.5 * 60.0, WithinAbs(r.weighted_phase, 1e-9));
}

TEST_CASE("perturbed equilibria return for small, unit and large inertia") {
    for (double M : {0.1, 1.0, 10.0}) {
        auto net = multi_rate({0.3, -0.1, -0.2}, {1.0, 1.0, 1.0}, {M, M}, 2.0);
        const auto eq = find_equilibrium(net);
        REQUIRE(eq.found);
        net.frame = Frame{true, omega_sync(net.profile.evaluate(0.0), net.dd.damping)};
        State s0{eq.theta, {0.05, -0.05}};
        s0.theta[0] += 0.1;
        s0.theta[2] -= 0.1;
        const auto traj = integrate(net, s0, 400.0, 1e-2, {40000, false});
        const auto& th = traj.final_state().theta;
        for (std::size_t i = 0; i < 3; ++i) CHECK_THAT(th[i] - th[2], WithinAbs(eq.theta[i] - eq.theta[2], 1e-8));
        for (double v : traj.final_state().thetadot) CHECK_THAT(v, WithinAbs(0.0, 1e-8));
    }
}

TEST_CASE("random initial phases either synchronize or rest at a critical point") {
    const auto net = multi_rate({0.5, 1.0, 0.25, 0.75}, {1.0, 2.0, 0.5, 1.5}, {0.8, 1.2}, 1.0);
    const auto s = sample_phase_sync(net, 20, 7, 150.0, 1e-2);
    CHECK(s.samples == 20);
    CHECK(s.unexplained == 0);
    CHECK(s.converged + s.near_equilibrium == 20);
    CHECK(s.converged >= 15);
    CHECK_THROWS_AS(sample_phase_sync(multi_rate({0.0, 1.0}, {1.0, 1.0}, {1.0}, 1.0), 2, 1, 1.0, 0.1),
                    std::invalid_argument);
}
