// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Runtime budgets are part of each criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kuramoto/kuramoto.hpp"

using namespace kuramoto;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << x;
    return os.str();
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// 1. Two oscillators: phase-locked difference arcsin(1/kappa), or drift.
Outcome two_oscillator_bifurcation() {
    double worst = 0.0;
    for (double kappa : {1.5, 2.0, 5.0}) {
        auto net = first_order_network(FrequencyProfile::constant({0.0, 1.0}), kappa);
        const double T = 100.0 / kappa;
        auto traj = integrate(net, State{{0.0, 0.0}, {}}, T, 1e-3, {.record_every = step_count(T, 1e-3), .diagnostics = false});
        const auto& th = traj.final_state().theta;
        worst = std::max(worst, std::abs((th[1] - th[0]) - std::asin(1.0 / kappa)));
    }
    auto net = first_order_network(FrequencyProfile::constant({0.0, 1.0}), 0.9);
    const double T = 100.0 / 0.9;
    auto traj = integrate(net, State{{0.0, 0.0}, {}}, T, 1e-3, {.record_every = step_count(T, 1e-3), .diagnostics = false});
    const double drift = std::abs(traj.final_state().theta[1] - traj.final_state().theta[0]);
    return {worst < 1e-6 && drift > pi,
            "max |difference - arcsin(1/kappa)| = " + fmt(worst) + " (< 1e-6); kappa = 0.9 drift = " + fmt(drift) +
                " (> pi)"};
}

// 2. Exact implicit coupling against a brute-force grid scan.
Outcome implicit_bound_oracle() {
    const std::vector<double> omega{-1.0, 0.0, 1.0};
    const auto exact = exact_implicit_coupling(omega);
    // Independent scan of 2 sum sqrt(1 - (W/u)^2) - sum 1/sqrt(1 - (W/u)^2) over [1, 2].
    auto f = [&](double u) {
        double a = 0.0;
        double b = 0.0;
        for (double w : omega) {
            const double c = std::sqrt(1.0 - (w / u) * (w / u));
            a += c;
            b += 1.0 / c;
        }
        return 2.0 * a - b;
    };
    double u_star = std::nan("");
    double prev_u = 1.0 + 1e-6;
    double prev_f = f(prev_u);
    for (long k = 2; k <= 1000000; ++k) {
        const double u = 1.0 + 1e-6 * static_cast<double>(k);
        const double fu = f(u);
        if ((prev_f < 0.0) != (fu < 0.0)) {
            u_star = prev_u + (u - prev_u) * prev_f / (prev_f - fu);
            break;
        }
        prev_u = u;
        prev_f = fu;
    }
    double s = 0.0;
    for (double w : omega) s += std::sqrt(1.0 - (w / u_star) * (w / u_star));
    const double K_scan = 3.0 * u_star / s;
    const double du = std::abs(exact.u_star - u_star);
    const double dK = std::abs(exact.value - K_scan);
    const bool ok = du < 1e-5 && dK < 1e-5 && std::abs(u_star - 1.242003) < 1e-5 && std::abs(K_scan - 1.704379) < 1e-5;
    return {ok, "u* = " + fmt(exact.u_star, 9) + " (scan " + fmt(u_star, 9) + "), K = " + fmt(exact.value, 9) +
                    " (scan " + fmt(K_scan, 9) + ")"};
}

// 3. Ordering K_necessary <= K_exact <= K_explicit on random draws.
Outcome bound_ordering() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<std::size_t> pick_n(3, 50);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = pick_n(rng);
        const auto omega = sample_uniform(n, -1.0, 1.0, rng());
        const auto rep = compute_bounds(omega);
        const double ke = rep.K_exact->value;
        if (rep.K_necessary > ke + 1e-9 || ke > rep.K_explicit + 1e-9) ++violations;
    }
    return {violations == 0, std::to_string(violations) + " violations in 1000 draws"};
}

// 4. Bound study at desk scale.
Outcome bound_study() {
    StudyConfig cfg;
    cfg.n_grid = {2, 10, 50, 100, 300};
    cfg.trials = 200;
    cfg.interval = {-1.0, 1.0};
    cfg.seed = 42;
    cfg.resolved = resolve_study(cfg);
    const auto rows = run_study(cfg);
    const auto& last = rows.back();
    const double explicit_target = 2.0 * 299.0 / 301.0;
    const double exact_target = 4.0 / pi;
    const double e1 = std::abs(last.k_explicit - explicit_target) / explicit_target;
    const double e2 = std::abs(last.k_exact - exact_target) / exact_target;
    double n2_gap = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const auto tr = study_trial(cfg, 2, t);
        const double span = tr.k_explicit;
        n2_gap = std::max({n2_gap, std::abs(tr.k_necessary - tr.k_exact) / span, std::abs(tr.k_exact - tr.k_explicit) / span});
    }
    bool ordered = true;
    for (const auto& r : rows) ordered = ordered && r.k_necessary <= r.k_exact && r.k_exact <= r.k_explicit;
    return {e1 < 0.02 && e2 < 0.10 && n2_gap <= 1e-9 && ordered,
            "n = 300: explicit " + fmt(last.k_explicit) + " (rel err " + fmt(e1, 3) + "), exact " + fmt(last.k_exact) +
                " (rel err " + fmt(e2, 3) + "); n = 2 max relative gap " + fmt(n2_gap, 3)};
}

// 5. Arc invariance, ultimate arc, and frequency synchronization rate.
Outcome cohesiveness_and_rates() {
    const double K = 1.1;
    auto net = first_order_network(FrequencyProfile::bipolar(10, 0.0, 1.0, 5), K);
    const auto env = performance_envelope(K, 1.0);
    // Low-frequency oscillators trail, high-frequency ones lead; arc gamma_max - 0.06.
    const double A = env.gamma_max - 0.06;
    std::mt19937_64 rng(7);
    std::vector<double> th(10);
    for (std::size_t i = 0; i < 10; ++i) th[i] = A * unit_uniform(rng);
    th[0] = 0.0;
    th[9] = A;
    const double h = 1e-3;
    const double T = 60.0;
    auto traj = integrate(net, State{th, {}}, T, h, {.record_every = 10});
    const double V0 = traj.diagnostics.front().V;
    double worst_increase = -1.0;
    double max_V = 0.0;
    for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
        const double V = traj.diagnostics[k].V;
        max_V = std::max(max_V, V);
        if (V >= env.gamma_min && V <= env.gamma_max)
            worst_increase = std::max(worst_increase, traj.diagnostics[k + 1].V - V);
    }
    const double final_V = traj.diagnostics.back().V;
    const double gamma = env.gamma_min + 0.1;
    std::vector<double> ts;
    std::vector<double> ys;
    bool entered = false;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        entered = entered || traj.diagnostics[k].V <= gamma;
        if (entered && traj.diagnostics[k].disagreement > 1e-10) {
            ts.push_back(traj.times[k]);
            ys.push_back(traj.diagnostics[k].disagreement);
        }
    }
    const double rate = fit_log_decay_rate(ts, ys);
    const double target = 0.95 * K * std::cos(gamma);
    return {V0 < env.gamma_max - 0.05 && worst_increase <= 1e-9 && final_V <= env.gamma_min + 1e-3 && rate >= target,
            "V(0) = " + fmt(V0) + ", max step increase in [gamma_min, gamma_max] = " + fmt(worst_increase, 3) +
                ", final V - gamma_min = " + fmt(final_V - env.gamma_min, 3) + ", rate " + fmt(rate, 4) +
                " >= " + fmt(target, 4)};
}

// 6. Identical frequencies: phase synchronization to the rotating mean.
Outcome phase_synchronization() {
    const double K = 1.0;
    const double s = 0.7;
    const std::size_t n = 10;
    auto net = first_order_network(FrequencyProfile::constant(std::vector<double>(n, s)), K);
    const double T = 50.0 / K;
    const double h = 5e-3;
    double worst_err = 0.0;
    double worst_rate = std::numeric_limits<double>::infinity();
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        std::mt19937_64 rng(mix_seed(1000 + trial));
        const double c = -pi + two_pi * unit_uniform(rng);
        std::vector<double> th(n);
        for (double& x : th) x = c + 3.0 * unit_uniform(rng);
        const auto traj = integrate(net, State{th, {}}, T, h, {.record_every = 20, .diagnostics = false});
        double mean0 = 0.0;
        for (double x : th) mean0 += x;
        mean0 /= static_cast<double>(n);
        for (double x : traj.final_state().theta) worst_err = std::max(worst_err, std::abs(x - (mean0 + s * T)));
        std::vector<double> ts;
        std::vector<double> ys;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto& x = traj.states[k].theta;
            double mean = 0.0;
            for (double v : x) mean += v;
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (double v : x) ss += (v - mean) * (v - mean);
            if (std::sqrt(ss) > 1e-10) {
                ts.push_back(traj.times[k]);
                ys.push_back(std::sqrt(ss));
            }
        }
        worst_rate = std::min(worst_rate, fit_log_decay_rate(ts, ys));
    }
    const double target = 0.95 * K * sinc(3.0);
    return {worst_err < 1e-6 && worst_rate >= target,
            "max |theta_i(T) - mean(theta(0)) - s T| = " + fmt(worst_err, 3) + ", slowest fitted rate " +
                fmt(worst_rate, 4) + " >= " + fmt(target, 4)};
}

NetworkSpec random_multirate_network(std::mt19937_64& rng, std::size_t n, std::size_t m, double K_over_Kc) {
    DampingInertiaSpec dd;
    dd.m = m;
    for (std::size_t i = 0; i < n; ++i) dd.damping.push_back(0.5 + 1.5 * unit_uniform(rng));
    for (std::size_t i = 0; i < m; ++i) dd.inertia.push_back(0.5 + 1.5 * unit_uniform(rng));
    std::vector<double> omega(n);
    for (double& w : omega) w = -1.0 + 2.0 * unit_uniform(rng);
    const auto st = omega_stats(scaled_frequencies(omega, dd.damping));
    const double K = K_over_Kc * (st.max - st.min);
    return NetworkSpec{Model::multi_rate, FrequencyProfile::constant(omega), K, dd, {}};
}

// 7. Jacobian inertia independent of lambda and of the inertia matrix.
Outcome inertia_invariance() {
    std::mt19937_64 rng(77);
    const std::vector<double> lambdas{0.0, 0.5, 1.0};
    const std::vector<double> scales{0.1, 1.0, 10.0};
    std::size_t failures = 0;
    std::string first_failure;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t ns[] = {3, 5, 10};
        const std::size_t n = ns[rng() % 3];
        const std::size_t ms[] = {0, (n + 1) / 2, n};
        const std::size_t m = ms[rng() % 3];
        const auto net = random_multirate_network(rng, n, m, 1.1 + 1.9 * unit_uniform(rng));
        const auto rep = conjugacy_check(net, scales, lambdas);
        const Inertia expected{n + m - 1, 1, 0};
        const bool ok = rep.passed() && rep.points.front().inertia == expected && rep.hessian_inertia == expected;
        if (!ok) {
            ++failures;
            if (first_failure.empty())
                first_failure = " (first failure: n = " + std::to_string(n) + ", m = " + std::to_string(m) +
                                ", inertia " + to_string(rep.points.front().inertia) + ")";
        }
    }
    return {failures == 0, std::to_string(50 - failures) + "/50 equilibria with inertia (n+m-1, 1, 0) across " +
                               "lambda x M grid" + first_failure};
}

// 8. Multi-rate and scaled first-order runs reach the same equilibrium.
Outcome first_second_order_equivalence() {
    const std::vector<double> omega{-0.3, 0.1, 0.5, -0.3};
    const std::vector<double> D{1.0, 0.6, 1.4, 0.8};
    const std::vector<double> M{1.0, 0.5, 2.0, 1.0};
    const auto st = omega_stats(scaled_frequencies(omega, D));
    const double K = 1.1 * (st.max - st.min);
    DampingInertiaSpec dd{D, M, 4};
    NetworkSpec second{Model::multi_rate, FrequencyProfile::constant(omega), K, dd, {}};
    NetworkSpec first{Model::scaled, FrequencyProfile::constant(omega), K, DampingInertiaSpec{D, {}, 0}, {}};
    const std::vector<double> th0{0.2, -0.4, 0.5, 0.0};
    const double T = 200.0;
    const double h = 1e-3;
    const IntegrateOptions opt{.record_every = step_count(T, h), .diagnostics = false};
    const auto a = integrate(second, State{th0, std::vector<double>(4, 0.0)}, T, h, opt).final_state();
    const auto b = integrate(first, State{th0, {}}, T, h, opt).final_state();
    double gap = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        gap = std::max(gap, std::abs(wrap_to_pi((a.theta[i] - a.theta[3]) - (b.theta[i] - b.theta[3]))));
    return {gap < 1e-6, "max grounded phase difference " + fmt(gap, 3) + " (< 1e-6), velocity norm " +
                            fmt(max_abs(a.thetadot), 3)};
}

// 9. Phase synchronization iff omega is proportional to D.
Outcome multirate_phase_sync() {
    const std::vector<double> D{1.0, 2.0, 3.0};
    const std::vector<double> th0{0.1, 0.2, 0.3};
    NetworkSpec net{Model::multi_rate, FrequencyProfile::constant({0.0, 0.0, 0.0}), 1.0, DampingInertiaSpec{D, {}, 0},
                    {}};
    const auto rep = multirate_sync_report(net, th0);
    const double T = 100.0;
    const auto traj = integrate(net, State{th0, {}}, T, 1e-3, {.record_every = 100, .diagnostics = false});
    const double c0 = 1.0 * 0.1 + 2.0 * 0.2 + 3.0 * 0.3;
    double drift = 0.0;
    for (const auto& s : traj.states) {
        double c = 0.0;
        for (std::size_t i = 0; i < 3; ++i) c += D[i] * s.theta[i];
        drift = std::max(drift, std::abs(c - c0));
    }
    double phase_err = 0.0;
    for (double x : traj.final_state().theta) phase_err = std::max(phase_err, std::abs(x - rep.weighted_phase));

    NetworkSpec skew{Model::multi_rate, FrequencyProfile::constant({0.3, 0.0, -0.3}), 1.2, DampingInertiaSpec{D, {}, 0},
                     {}};
    const auto rep2 = multirate_sync_report(skew);
    const auto traj2 = integrate(skew, State{th0, {}}, T, 1e-3, {.record_every = 100, .diagnostics = false});
    const double V_end = enclosing_arc_length(traj2.final_state().theta);
    const bool ok = rep.phase_sync_admissible && std::abs(rep.weighted_phase - 1.4 / 6.0) < 1e-12 &&
                    phase_err < 1e-6 && drift < 1e-8 && !rep2.phase_sync_admissible && V_end > 0.01;
    return {ok, "asymptotic phase error " + fmt(phase_err, 3) + ", drift of sum D theta " + fmt(drift, 3) +
                    ", non-proportional terminal V = " + fmt(V_end, 4)};
}

// 10. Switching and slowly varying natural frequencies.
Outcome time_varying_frequencies() {
    const std::size_t n = 10;
    const double K = 1.1;
    const auto env = performance_envelope(K, 1.0);
    std::mt19937_64 rng(2024);
    std::vector<double> switches;
    std::vector<std::vector<double>> levels;
    for (int k = 0; k <= 5; ++k) {
        std::vector<double> row(n);
        for (double& w : row) w = unit_uniform(rng);
        levels.push_back(row);
        if (k > 0) switches.push_back(10.0 * k);
    }
    auto profile = FrequencyProfile::switching(switches, levels, 10.0, {0.0, 1.0});
    NetworkSpec net = first_order_network(profile, K);
    std::vector<double> th(n);
    for (double& x : th) x = (env.gamma_max - 0.1) * unit_uniform(rng);
    th[0] = 0.0;
    th[1] = env.gamma_max - 0.1;
    const double h = 1e-3;
    const auto traj = integrate(net, State{th, {}}, 60.0, h, {.record_every = 10});
    double max_V = 0.0;
    for (const auto& d : traj.diagnostics) max_V = std::max(max_V, d.V);
    double worst_before_switch = 0.0;
    for (double ts : switches) {
        // Last recorded sample strictly before the switch.
        const auto k = static_cast<std::size_t>(std::llround(ts / (10 * h))) - 1;
        worst_before_switch = std::max(worst_before_switch, traj.diagnostics[k].V - env.gamma_min);
    }
    const bool switching_ok = max_V <= env.gamma_max && worst_before_switch <= 1e-3;

    std::vector<double> base(n);
    std::vector<double> amp(n, 0.05);
    std::vector<double> rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        base[i] = 0.1 + 0.8 * static_cast<double>(i) / static_cast<double>(n - 1);
        rate[i] = 0.01 + 0.002 * static_cast<double>(i);
    }
    auto smooth = FrequencyProfile::sinusoidal(base, amp, rate, {}, {0.0, 1.0});
    auto cfg = SimulateConfig{first_order_network(smooth, K)};
    cfg.initial = State{std::vector<double>(n, 0.0), {}};
    cfg.h = 1e-2;
    cfg.T = 100.0;
    cfg.record_every = 10;
    cfg.tail_fraction = 0.5;
    const auto res = run_scenario(cfg);
    const double gap = res.summary.tail_gap.value_or(1.0);
    const double acc = res.summary.tail_relative_acceleration.value_or(1.0);
    const bool smooth_ok = acc < 1e-4 && gap < 1e-3;
    return {switching_ok && smooth_ok, "switching: max V = " + fmt(max_V, 4) + " (gamma_max " + fmt(env.gamma_max, 4) +
                                           "), worst V - gamma_min before a switch " + fmt(worst_before_switch, 3) +
                                           "; smooth: tail gap " + fmt(gap, 3) + " with ||Omega''|| " + fmt(acc, 3)};
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "two-oscillator bifurcation", 1.0, two_oscillator_bifurcation},
        {2, "implicit bound vs grid scan", 1.0, implicit_bound_oracle},
        {3, "bound ordering", 10.0, bound_ordering},
        {4, "bound study", 120.0, bound_study},
        {5, "arc invariance and rates", 5.0, cohesiveness_and_rates},
        {6, "phase synchronization", 10.0, phase_synchronization},
        {7, "inertia invariance", 30.0, inertia_invariance},
        {8, "first/second-order equivalence", 5.0, first_second_order_equivalence},
        {9, "multi-rate phase synchronization", 5.0, multirate_phase_sync},
        {10, "time-varying frequencies", 10.0, time_varying_frequencies},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = out.pass && in_budget;
        if (!pass) ++failed;
        std::printf("criterion %2d %s: %s | %s | %.2f s (budget %.0f s)\n", c.id, pass ? "PASS" : "FAIL", c.name,
                    out.detail.c_str(), secs, c.budget_s);
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
