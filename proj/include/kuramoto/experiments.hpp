#pragma once

// Configuration-driven runs: parameter studies of the coupling bounds,
// simulation scenarios with summary statistics, and equilibrium reports.
// Outputs are CSV or JSON files written atomically, each stamped with the
// tool version, a hash of the resolved configuration, and the seed.

#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "kuramoto/bounds.hpp"
#include "kuramoto/dynamics.hpp"
#include "kuramoto/frequency.hpp"
#include "kuramoto/stability.hpp"
#include "kuramoto/torus.hpp"

namespace kuramoto {

using json = nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

/// Invalid configuration; `path()` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error((path.empty() ? std::string("config") : path) + ": " + message), path_{std::move(path)} {}

    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// ---------------------------------------------------------------------------
// Output plumbing

/// 17 significant digits, enough to read back the same double.
inline std::string format_double(double x) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return {buf.data(), end};
}

inline std::uint64_t fnv1a64(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << x;
    return os.str();
}

inline std::string config_hash(const json& resolved) { return hex64(fnv1a64(resolved.dump())); }

/// Writes to a sibling temporary file, then renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp-" + hex64(fnv1a64(path.string()) ^ fnv1a64(content));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("write to " + tmp.string() + " failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw std::runtime_error("cannot move output into place at " + path.string());
    }
}

/// Comment lines prepended to every CSV output.
inline std::string csv_preamble(const json& resolved, std::uint64_t seed) {
    std::string s;
    s += "# tool_version: " + std::string(tool_version) + "\n";
    s += "# config_hash: " + config_hash(resolved) + "\n";
    s += "# seed: " + std::to_string(seed) + "\n";
    s += "# config: " + resolved.dump() + "\n";
    return s;
}

/// Provenance block embedded in every JSON output.
inline json output_stamp(const json& resolved, std::uint64_t seed) {
    return {{"tool_version", tool_version}, {"config_hash", config_hash(resolved)}, {"seed", seed},
            {"config", resolved}};
}

// ---------------------------------------------------------------------------
// Config reading

/// Reads fields of one JSON object and rejects any it was not asked about.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_{j}, path_{std::move(path)} {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[nodiscard]] bool has(const std::string& key) {
        seen_.push_back(key);
        return j_.contains(key);
    }

    const json& raw(const std::string& key) {
        if (!has(key)) throw ConfigError(field(key), "missing required field");
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key) {
        return convert<T>(raw(key), field(key));
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        return has(key) ? convert<T>(j_.at(key), field(key)) : fallback;
    }

    template <class T>
    std::optional<T> maybe(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return convert<T>(j_.at(key), field(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                throw ConfigError(field(key), "unknown field");
        }
    }

    template <class T>
    static T convert(const json& v, const std::string& path) {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(path, "expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 &&
                                               !v.is_number_unsigned()))
                    throw ConfigError(path, "expected a nonnegative integer");
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
                for (const auto& e : v)
                    if (!e.is_number()) throw ConfigError(path, "expected an array of numbers");
            }
            return v.get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(path, e.what());
        }
    }

private:
    const json& j_;
    std::string path_;
    std::vector<std::string> seen_;
};

inline Interval read_interval(const json& v, const std::string& path) {
    const auto xs = ObjectReader::convert<std::vector<double>>(v, path);
    if (xs.size() != 2 || !(xs[0] <= xs[1])) throw ConfigError(path, "expected [lo, hi] with lo <= hi");
    return {xs[0], xs[1]};
}

inline json to_json(const FrequencyProfile& p) {
    json j;
    j["kind"] = to_string(p.kind());
    switch (p.kind()) {
        case ProfileKind::constant:
        case ProfileKind::bipolar:
        case ProfileKind::uniform_sample: j["values"] = p.levels().front(); break;
        case ProfileKind::piecewise_switching:
            j["switch_times"] = std::vector<double>(p.switch_times().begin(), p.switch_times().end());
            j["values"] = p.levels();
            j["dwell"] = p.dwell();
            j["support"] = {p.support().lo, p.support().hi};
            break;
        case ProfileKind::smooth_sinusoidal:
            j["base"] = p.levels().front();
            j["amplitude"] = std::vector<double>(p.amplitude().begin(), p.amplitude().end());
            j["rate"] = std::vector<double>(p.rate().begin(), p.rate().end());
            j["phase"] = std::vector<double>(p.phase().begin(), p.phase().end());
            j["support"] = {p.support().lo, p.support().hi};
            break;
    }
    if (p.seed()) j["seed"] = *p.seed();
    return j;
}

inline FrequencyProfile parse_profile(const json& v, const std::string& path, std::uint64_t default_seed) {
    ObjectReader r{v, path};
    const auto kind = r.get<std::string>("kind");
    try {
        if (kind == "constant") {
            auto values = r.get<std::vector<double>>("values");
            r.finish();
            return FrequencyProfile::constant(std::move(values));
        }
        if (kind == "bipolar") {
            const auto n = r.get<std::size_t>("n");
            const auto lo = r.get<double>("omega_min");
            const auto hi = r.get<double>("omega_max");
            const auto n_low = r.get<std::size_t>("n_low", n / 2);
            r.finish();
            return FrequencyProfile::bipolar(n, lo, hi, n_low);
        }
        if (kind == "uniform") {
            const auto n = r.get<std::size_t>("n");
            const auto lo = r.get<double>("omega_min");
            const auto hi = r.get<double>("omega_max");
            const auto seed = r.get<std::uint64_t>("seed", default_seed);
            r.finish();
            return FrequencyProfile::uniform(n, lo, hi, seed);
        }
        if (kind == "switching") {
            auto times = r.get<std::vector<double>>("switch_times");
            const auto& raw = r.raw("values");
            if (!raw.is_array()) throw ConfigError(r.field("values"), "expected an array of frequency vectors");
            std::vector<std::vector<double>> levels;
            for (std::size_t k = 0; k < raw.size(); ++k)
                levels.push_back(
                    ObjectReader::convert<std::vector<double>>(raw[k], r.field("values") + "[" + std::to_string(k) + "]"));
            const auto dwell = r.get<double>("dwell");
            const auto support = read_interval(r.raw("support"), r.field("support"));
            r.finish();
            return FrequencyProfile::switching(std::move(times), std::move(levels), dwell, support);
        }
        if (kind == "sinusoidal") {
            auto base = r.get<std::vector<double>>("base");
            auto amp = r.get<std::vector<double>>("amplitude");
            auto rate = r.get<std::vector<double>>("rate");
            auto phase = r.get<std::vector<double>>("phase", {});
            const auto support = read_interval(r.raw("support"), r.field("support"));
            r.finish();
            return FrequencyProfile::sinusoidal(std::move(base), std::move(amp), std::move(rate), std::move(phase),
                                                support);
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(r.field("kind"), "unknown profile kind '" + kind + "'");
}

/// Coupling threshold a configuration's K_ratio refers to: the spread of the
/// scaled frequencies for time-invariant profiles, the width of the support
/// for time-varying ones.
inline double reference_critical_coupling(const FrequencyProfile& p, std::span<const double> damping) {
    if (!p.time_invariant()) return p.support().hi - p.support().lo;
    const auto wbar = scaled_frequencies(p.evaluate(0.0), damping);
    const auto st = omega_stats(wbar);
    return st.max - st.min;
}

/// Network block shared by the simulate and equilibria configs. Consumes the
/// fields it recognises from `r` and records the resolved values in `out`.
inline NetworkSpec parse_network(ObjectReader& r, std::uint64_t seed, json& out) {
    const auto model_name = r.get<std::string>("model", "first-order");
    Model model{};
    try {
        model = model_from_string(model_name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.field("model"), e.what());
    }
    NetworkSpec net{model, parse_profile(r.raw("profile"), r.field("profile"), seed), 1.0, {}, {}};
    const std::size_t n = net.profile.size();
    net.dd.m = r.get<std::size_t>("m", 0);
    net.dd.damping = r.get<std::vector<double>>("damping", std::vector<double>(n, 1.0));
    net.dd.inertia = r.get<std::vector<double>>("inertia", std::vector<double>(net.dd.m, 1.0));
    try {
        net.dd.validate(n);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.field("damping"), e.what());
    }

    const auto K = r.maybe<double>("K");
    const auto ratio = r.maybe<double>("K_ratio");
    if (K && ratio) throw ConfigError(r.field("K_ratio"), "give either K or K_ratio, not both");
    const double Kc = reference_critical_coupling(net.profile, net.dd.damping);
    if (K) {
        net.K = *K;
    } else if (ratio) {
        net.K = *ratio * Kc;
    } else {
        throw ConfigError(r.field("K"), "missing required field (or K_ratio)");
    }

    if (r.has("frame")) {
        ObjectReader fr{r.raw("frame"), r.field("frame")};
        const auto type = fr.get<std::string>("type", "stationary");
        if (type == "stationary") {
            net.frame = {};
        } else if (type == "rotating") {
            net.frame = Frame{true, fr.get<double>("nu")};
        } else {
            throw ConfigError(fr.field("type"), "expected 'stationary' or 'rotating'");
        }
        fr.finish();
    }
    try {
        net.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(r.field("model"), e.what());
    }

    out["model"] = to_string(net.model);
    out["profile"] = to_json(net.profile);
    out["K"] = net.K;
    if (ratio) out["K_ratio"] = *ratio;
    out["K_critical"] = Kc;
    out["m"] = net.dd.m;
    out["damping"] = net.dd.damping;
    out["inertia"] = net.dd.inertia;
    out["frame"] = net.frame.rotating ? json{{"type", "rotating"}, {"nu", net.frame.nu}}
                                      : json{{"type", "stationary"}};
    return net;
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open configuration file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string(), std::string("malformed JSON: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Simulation scenarios

struct SimulateConfig {
    explicit SimulateConfig(NetworkSpec net) : network{std::move(net)} {}

    NetworkSpec network;
    State initial;
    double h = 1e-3;
    double T = 50.0;
    std::uint64_t seed = 0;
    std::size_t record_every = 10;
    double entry_slack = 1e-3;    // entry into the ultimate arc is V <= gamma_min + entry_slack
    double tail_fraction = 0.5;   // tail of the run used for the consensus gap
    json resolved;
};

/// Default step: 1e-3 shrunk by an integer factor for strong coupling, so it
/// still divides switch times given in milliseconds.
inline double default_step(double K) { return 1e-3 / std::ceil(std::max(1.0, K)); }

inline std::vector<double> parse_initial_phases(const json& v, const std::string& path, std::size_t n,
                                                std::uint64_t seed) {
    if (v.is_array()) {
        auto th = ObjectReader::convert<std::vector<double>>(v, path);
        if (th.size() != n) throw ConfigError(path, "expected " + std::to_string(n) + " phases");
        return th;
    }
    ObjectReader r{v, path};
    const double arc = r.get<double>("random_arc");
    r.finish();
    if (!(arc >= 0.0 && arc <= two_pi)) throw ConfigError(r.field("random_arc"), "arc must lie in [0, 2 pi]");
    std::mt19937_64 rng(mix_seed(seed ^ 0x7468657461ULL));
    std::vector<double> th(n);
    for (double& x : th) x = arc * unit_uniform(rng);
    return th;
}

inline SimulateConfig parse_simulate_config(const json& j) {
    ObjectReader r{j, ""};
    json out;
    const auto seed = r.get<std::uint64_t>("seed", 0);
    SimulateConfig c{parse_network(r, seed, out)};
    c.seed = seed;
    const std::size_t n = c.network.n();
    c.initial.theta = r.has("theta0") ? parse_initial_phases(r.raw("theta0"), r.field("theta0"), n, c.seed)
                                      : std::vector<double>(n, 0.0);
    c.initial.thetadot =
        r.get<std::vector<double>>("thetadot0", std::vector<double>(c.network.velocity_dim(), 0.0));
    if (c.initial.thetadot.size() != c.network.velocity_dim())
        throw ConfigError(r.field("thetadot0"),
                          "expected " + std::to_string(c.network.velocity_dim()) + " velocity entries");
    c.h = r.get<double>("h", default_step(c.network.K));
    double default_T = 50.0 / c.network.K;
    if (!c.network.profile.switch_times().empty())
        default_T = c.network.profile.switch_times().back() + c.network.profile.dwell();
    c.T = r.get<double>("T", default_T);
    c.record_every = r.get<std::size_t>("record_every", 10);
    c.entry_slack = r.get<double>("entry_slack", 1e-3);
    c.tail_fraction = r.get<double>("tail_fraction", 0.5);
    r.finish();
    if (!(c.h > 0.0)) throw ConfigError("h", "must be positive");
    if (!(c.T >= c.h)) throw ConfigError("T", "must be at least h");
    if (c.record_every == 0) throw ConfigError("record_every", "must be positive");
    if (!(c.tail_fraction >= 0.0 && c.tail_fraction < 1.0)) throw ConfigError("tail_fraction", "must lie in [0, 1)");
    for (double ts : c.network.profile.switch_times()) {
        const double k = ts / c.h;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            throw ConfigError("h", "step must divide every switch time");
    }

    out["theta0"] = c.initial.theta;
    out["thetadot0"] = c.initial.thetadot;
    out["h"] = c.h;
    out["T"] = c.T;
    out["seed"] = c.seed;
    out["record_every"] = c.record_every;
    out["entry_slack"] = c.entry_slack;
    out["tail_fraction"] = c.tail_fraction;
    c.resolved = std::move(out);
    return c;
}

/// Decay rate -d/dt log(y) by least squares; NaN with fewer than 3 points.
inline double fit_log_decay_rate(std::span<const double> t, std::span<const double> y) {
    const std::size_t n = t.size();
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    double st = 0.0;
    double sl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        st += t[i];
        sl += std::log(y[i]);
    }
    const double mt = st / static_cast<double>(n);
    const double ml = sl / static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (t[i] - mt) * (std::log(y[i]) - ml);
        den += (t[i] - mt) * (t[i] - mt);
    }
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return -num / den;
}

struct IntervalFit {
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t samples = 0;
    double rate = std::numeric_limits<double>::quiet_NaN();
};

struct ScenarioSummary {
    double K = 0.0;
    double K_critical = 0.0;
    std::optional<double> gamma_min;
    std::optional<double> gamma_max;
    std::optional<double> entry_time;  // first recorded V <= gamma_min + entry_slack
    double max_V = 0.0;
    std::optional<double> max_V_after_entry;
    double final_V = 0.0;
    double final_r = 0.0;
    std::vector<IntervalFit> interval_fits;
    std::optional<double> tail_gap;                  // sup ||delta' - L^+ Omega'||_inf over the tail
    std::optional<double> tail_relative_acceleration;  // sup ||Omega''||_inf over the tail
};

struct ScenarioResult {
    Trajectory trajectory;
    ScenarioSummary summary;
};

inline constexpr double decay_fit_floor = 1e-10;

inline ScenarioSummary summarize(const SimulateConfig& cfg, const Trajectory& traj) {
    const auto& net = cfg.network;
    ScenarioSummary s;
    s.K = net.K;
    s.K_critical = reference_critical_coupling(net.profile, net.dd.damping);
    if (net.K > s.K_critical) {
        const auto env = performance_envelope(net.K, s.K_critical);
        s.gamma_min = env.gamma_min;
        s.gamma_max = env.gamma_max;
    }
    const std::size_t N = traj.size();
    for (std::size_t k = 0; k < N; ++k) {
        const double V = traj.diagnostics[k].V;
        s.max_V = std::max(s.max_V, V);
        if (s.gamma_min && !s.entry_time && V <= *s.gamma_min + cfg.entry_slack) s.entry_time = traj.times[k];
        if (s.entry_time) s.max_V_after_entry = std::max(s.max_V_after_entry.value_or(0.0), V);
    }
    s.final_V = traj.diagnostics.back().V;
    s.final_r = traj.diagnostics.back().r;

    std::vector<double> bounds{0.0};
    for (double ts : net.profile.switch_times())
        if (ts < cfg.T) bounds.push_back(ts);
    bounds.push_back(cfg.T);
    const double from = s.entry_time.value_or(0.0);
    for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
        IntervalFit fit;
        fit.t_start = bounds[b];
        fit.t_end = bounds[b + 1];
        std::vector<double> ts;
        std::vector<double> ys;
        for (std::size_t k = 0; k < N; ++k) {
            const double t = traj.times[k];
            if (t < fit.t_start || t >= fit.t_end || t < from) continue;
            const double y = traj.diagnostics[k].disagreement;
            if (!(y > decay_fit_floor)) continue;
            ts.push_back(t);
            ys.push_back(y);
        }
        fit.samples = ts.size();
        fit.rate = fit_log_decay_rate(ts, ys);
        s.interval_fits.push_back(fit);
    }

    if (net.profile.kind() == ProfileKind::smooth_sinusoidal &&
        (net.model == Model::first_order || net.model == Model::scaled)) {
        const double t0 = cfg.tail_fraction * cfg.T;
        double gap = 0.0;
        double acc = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            if (traj.times[k] < t0) continue;
            const auto cd = consensus_diagnostics(net, traj.states[k], traj.times[k]);
            const auto& f = traj.diagnostics[k].frequencies;
            double mean = 0.0;
            for (double x : f) mean += x;
            mean /= static_cast<double>(f.size());
            for (std::size_t i = 0; i < f.size(); ++i)
                gap = std::max(gap, std::abs(f[i] - mean - cd.equilibrium_disagreement(static_cast<Eigen::Index>(i))));
            const auto a = net.profile.acceleration(traj.times[k]);
            double am = 0.0;
            for (double x : a) am += x;
            am /= static_cast<double>(a.size());
            for (double x : a) acc = std::max(acc, std::abs(x - am));
        }
        s.tail_gap = gap;
        s.tail_relative_acceleration = acc;
    }
    return s;
}

inline ScenarioResult run_scenario(const SimulateConfig& cfg) {
    ScenarioResult res;
    res.trajectory = integrate(cfg.network, cfg.initial, cfg.T, cfg.h, {.record_every = cfg.record_every});
    res.summary = summarize(cfg, res.trajectory);
    return res;
}

inline json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

inline json to_json(const ScenarioSummary& s) {
    json fits = json::array();
    for (const auto& f : s.interval_fits)
        fits.push_back({{"t_start", f.t_start},
                        {"t_end", f.t_end},
                        {"samples", f.samples},
                        {"rate", std::isnan(f.rate) ? json(nullptr) : json(f.rate)}});
    return {{"K", s.K},
            {"K_critical", s.K_critical},
            {"gamma_min", optional_json(s.gamma_min)},
            {"gamma_max", optional_json(s.gamma_max)},
            {"entry_time", optional_json(s.entry_time)},
            {"max_V", s.max_V},
            {"max_V_after_entry", optional_json(s.max_V_after_entry)},
            {"final_V", s.final_V},
            {"final_r", s.final_r},
            {"interval_fits", fits},
            {"tail_gap", optional_json(s.tail_gap)},
            {"tail_relative_acceleration", optional_json(s.tail_relative_acceleration)}};
}

inline std::string trajectory_csv(const SimulateConfig& cfg, const Trajectory& traj) {
    const std::size_t n = cfg.network.n();
    const std::size_t mv = cfg.network.velocity_dim();
    std::string s = csv_preamble(cfg.resolved, cfg.seed);
    s += "t";
    for (std::size_t i = 1; i <= n; ++i) s += ",theta_" + std::to_string(i);
    for (std::size_t i = 1; i <= mv; ++i) s += ",thetadot_" + std::to_string(i);
    s += ",V,r,disagreement_norm,H\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        s += format_double(traj.times[k]);
        for (double x : traj.states[k].theta) s += "," + format_double(x);
        for (double x : traj.states[k].thetadot) s += "," + format_double(x);
        const auto& d = traj.diagnostics[k];
        s += "," + format_double(d.V) + "," + format_double(d.r) + "," + format_double(d.disagreement) + "," +
             format_double(d.H) + "\n";
    }
    return s;
}

// ---------------------------------------------------------------------------
// Bound studies

struct StudyConfig {
    std::vector<std::size_t> n_grid{2, 5, 10, 50, 100, 300};
    std::size_t trials = 200;
    Interval interval{-1.0, 1.0};
    std::uint64_t seed = 0;
    std::size_t threads = 1;  // 0 = hardware concurrency
    json resolved;
};

struct StudyRow {
    std::size_t n = 0;
    double k_necessary = 0.0;
    double k_exact = 0.0;
    double k_explicit = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

struct StudyTrial {
    double k_necessary = 0.0;
    double k_exact = 0.0;
    double k_explicit = 0.0;
};

/// The thread count is left out so outputs do not depend on it.
inline json resolve_study(const StudyConfig& c) {
    return {{"n_grid", c.n_grid}, {"trials", c.trials}, {"interval", {c.interval.lo, c.interval.hi}}, {"seed", c.seed}};
}

inline StudyConfig parse_study_config(const json& j) {
    ObjectReader r{j, ""};
    StudyConfig c;
    if (r.has("n_grid")) {
        const auto& v = r.raw("n_grid");
        if (!v.is_array() || v.empty()) throw ConfigError("n_grid", "expected a nonempty array of sizes");
        c.n_grid.clear();
        for (std::size_t k = 0; k < v.size(); ++k)
            c.n_grid.push_back(ObjectReader::convert<std::size_t>(v[k], "n_grid[" + std::to_string(k) + "]"));
    }
    c.trials = r.get<std::size_t>("trials", c.trials);
    if (r.has("interval")) c.interval = read_interval(r.raw("interval"), "interval");
    c.seed = r.get<std::uint64_t>("seed", 0);
    c.threads = r.get<std::size_t>("threads", 1);
    r.finish();
    if (c.trials == 0) throw ConfigError("trials", "must be at least 1");
    for (std::size_t k = 0; k < c.n_grid.size(); ++k)
        if (c.n_grid[k] < 2) throw ConfigError("n_grid[" + std::to_string(k) + "]", "n must be at least 2");
    if (!(c.interval.lo < c.interval.hi)) throw ConfigError("interval", "must have positive width");
    c.resolved = resolve_study(c);
    return c;
}

/// Seed of one trial: the base seed xor the trial index, decorrelated per n.
inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t trial) {
    return mix_seed(mix_seed(seed ^ static_cast<std::uint64_t>(trial)) ^ static_cast<std::uint64_t>(n));
}

inline StudyTrial study_trial(const StudyConfig& c, std::size_t n, std::size_t trial) {
    const auto omega = sample_uniform(n, c.interval.lo, c.interval.hi, trial_seed(c.seed, n, trial));
    const auto rep = compute_bounds(omega);
    return {rep.K_necessary, rep.K_exact->value, rep.K_explicit};
}

inline std::vector<StudyRow> run_study(const StudyConfig& c) {
    std::size_t threads = c.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : c.threads;
    threads = std::min(threads, c.trials);
    std::vector<StudyRow> rows;
    for (std::size_t n : c.n_grid) {
        if (n < 2) throw std::invalid_argument("run_study: n must be at least 2");
        std::vector<StudyTrial> results(c.trials);
        std::vector<std::exception_ptr> errors(threads);
        auto work = [&](std::size_t tid) {
            try {
                for (std::size_t i = tid; i < c.trials; i += threads) results[i] = study_trial(c, n, i);
            } catch (...) {
                errors[tid] = std::current_exception();
            }
        };
        if (threads == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
            for (auto& th : pool) th.join();
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);

        StudyRow row;
        row.n = n;
        row.trials = c.trials;
        row.seed = c.seed;
        for (const auto& t : results) {
            row.k_necessary += t.k_necessary;
            row.k_exact += t.k_exact;
            row.k_explicit += t.k_explicit;
        }
        const double T = static_cast<double>(c.trials);
        row.k_necessary /= T;
        row.k_exact /= T;
        row.k_explicit /= T;
        rows.push_back(row);
    }
    return rows;
}

inline std::string study_csv(const StudyConfig& c, const std::vector<StudyRow>& rows) {
    std::string s = csv_preamble(c.resolved, c.seed);
    s += "n,k_necessary,k_exact,k_explicit,trials,seed\n";
    for (const auto& r : rows)
        s += std::to_string(r.n) + "," + format_double(r.k_necessary) + "," + format_double(r.k_exact) + "," +
             format_double(r.k_explicit) + "," + std::to_string(r.trials) + "," + std::to_string(r.seed) + "\n";
    return s;
}

// ---------------------------------------------------------------------------
// Equilibrium reports

struct EquilibriaConfig {
    explicit EquilibriaConfig(NetworkSpec net) : network{std::move(net)} {}

    NetworkSpec network;
    double lambda = 0.0;
    std::vector<double> lambdas{0.0, 0.5, 1.0};
    std::vector<double> inertia_scales{1.0};
    std::vector<double> theta0;  // optional, for the asymptotic weighted phase
    std::uint64_t seed = 0;
    json resolved;
};

inline EquilibriaConfig parse_equilibria_config(const json& j) {
    ObjectReader r{j, ""};
    json out;
    const auto seed = r.get<std::uint64_t>("seed", 0);
    EquilibriaConfig c{parse_network(r, seed, out)};
    c.seed = seed;
    c.lambda = r.get<double>("lambda", 0.0);
    c.lambdas = r.get<std::vector<double>>("lambdas", c.lambdas);
    c.inertia_scales = r.get<std::vector<double>>("inertia_scales", c.inertia_scales);
    c.theta0 = r.get<std::vector<double>>("theta0", {});
    r.finish();
    auto check_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!check_unit(c.lambda)) throw ConfigError("lambda", "must lie in [0, 1]");
    if (c.lambdas.empty()) throw ConfigError("lambdas", "must be nonempty");
    for (std::size_t k = 0; k < c.lambdas.size(); ++k)
        if (!check_unit(c.lambdas[k])) throw ConfigError("lambdas[" + std::to_string(k) + "]", "must lie in [0, 1]");
    if (c.inertia_scales.empty()) throw ConfigError("inertia_scales", "must be nonempty");
    for (std::size_t k = 0; k < c.inertia_scales.size(); ++k)
        if (!(c.inertia_scales[k] > 0.0))
            throw ConfigError("inertia_scales[" + std::to_string(k) + "]", "must be positive");
    if (!c.theta0.empty() && c.theta0.size() != c.network.n())
        throw ConfigError("theta0", "expected " + std::to_string(c.network.n()) + " phases");
    if (!c.network.profile.time_invariant())
        throw ConfigError("profile", "equilibria need time-invariant frequencies");
    out["lambda"] = c.lambda;
    out["lambdas"] = c.lambdas;
    out["inertia_scales"] = c.inertia_scales;
    out["theta0"] = c.theta0;
    out["seed"] = c.seed;
    c.resolved = std::move(out);
    return c;
}

inline json inertia_json(const Inertia& in) {
    return {{"stable", in.stable}, {"center", in.center}, {"unstable", in.unstable}};
}

/// Full equilibria report; throws EquilibriumNotFound if none exists.
inline json equilibria_report(const EquilibriaConfig& c) {
    json j = output_stamp(c.resolved, c.seed);
    const auto sync = multirate_sync_report(c.network, c.theta0);
    j["multirate"] = {{"omega_sync", sync.omega_sync},
                      {"K_critical", sync.K_critical},
                      {"frequency_sync_guaranteed", sync.frequency_sync_guaranteed},
                      {"phase_sync_admissible", sync.phase_sync_admissible},
                      {"s_bar", sync.s_bar}};
    if (!c.theta0.empty()) j["multirate"]["weighted_phase"] = sync.weighted_phase;

    const auto rep = stability_report(c.network, c.lambda);
    json ev = json::array();
    for (const auto& e : rep.eigenvalues) ev.push_back({e.real(), e.imag()});
    j["equilibrium"] = rep.equilibrium;
    j["residual"] = rep.residual;
    j["lambda"] = rep.lambda;
    j["inertia"] = inertia_json(rep.inertia);
    j["hessian_inertia"] = inertia_json(rep.hessian_inertia);
    j["eigenvalues"] = ev;
    j["zero_dim"] = rep.zero_dim;
    j["hyperbolic"] = rep.hyperbolic;
    j["classification"] = rep.hyperbolic ? (rep.inertia.unstable == 0 ? "stable" : "unstable")
                                         : "non-hyperbolic, not classified";

    const auto cc = conjugacy_check(c.network, c.inertia_scales, c.lambdas);
    json pts = json::array();
    for (const auto& p : cc.points)
        pts.push_back({{"lambda", p.lambda},
                       {"inertia_scale", p.inertia_scale},
                       {"residual", p.residual},
                       {"inertia", inertia_json(p.inertia)}});
    j["conjugacy"] = {{"points", pts},
                      {"max_residual", cc.max_residual},
                      {"equilibria_agree", cc.equilibria_agree},
                      {"inertia_invariant", cc.inertia_invariant},
                      {"matches_hessian", cc.matches_hessian},
                      {"center_is_rotation", cc.center_is_rotation},
                      {"degenerate", cc.degenerate},
                      {"passed", cc.passed()}};
    return j;
}

inline json to_json(const BoundReport& r) {
    json j{{"n", r.n}, {"K_explicit", r.K_explicit}, {"K_necessary", r.K_necessary}};
    if (r.K_exact)
        j["K_exact"] = {{"value", r.K_exact->value},
                        {"u_star", r.K_exact->u_star},
                        {"iterations", r.K_exact->iterations},
                        {"residual", r.K_exact->residual},
                        {"degenerate", r.K_exact->degenerate}};
    if (r.K_continuum) j["K_continuum"] = *r.K_continuum;
    if (r.K_ermentrout)
        j["K_ermentrout"] = {{"value", r.K_ermentrout->K},
                             {"maximizer", r.K_ermentrout->maximizer},
                             {"functional_max", r.K_ermentrout->functional_max}};
    return j;
}

inline std::string bounds_csv(const BoundReport& r, const json& resolved, std::uint64_t seed) {
    auto opt = [](bool present, double v) { return present ? format_double(v) : std::string{}; };
    std::string s = csv_preamble(resolved, seed);
    s += "n,k_necessary,k_exact,k_explicit,k_continuum,k_ermentrout\n";
    s += std::to_string(r.n) + "," + format_double(r.K_necessary) + "," +
         opt(r.K_exact.has_value(), r.K_exact ? r.K_exact->value : 0.0) + "," + format_double(r.K_explicit) + "," +
         opt(r.K_continuum.has_value(), r.K_continuum.value_or(0.0)) + "," +
         opt(r.K_ermentrout.has_value(), r.K_ermentrout ? r.K_ermentrout->K : 0.0) + "\n";
    return s;
}

/// Density CSV: rows "omega,density" on a uniform grid over [-1, 1] with an
/// odd number of nodes. A header line and '#' comments are skipped.
inline TabulatedDensity read_density_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open density file");
    std::vector<double> xs;
    std::vector<double> gs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno), "expected 'omega,density'");
        try {
            xs.push_back(std::stod(line.substr(0, comma)));
            gs.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            if (xs.empty() && lineno == 1) continue;  // header
            throw ConfigError(path.string() + ":" + std::to_string(lineno), "expected two numbers");
        }
    }
    if (gs.size() < 3 || gs.size() % 2 == 0)
        throw ConfigError(path.string(), "need an odd number (>= 3) of grid points");
    TabulatedDensity d;
    d.values = gs;
    for (std::size_t k = 0; k < xs.size(); ++k)
        if (std::abs(xs[k] - d.node(k)) > 1e-9)
            throw ConfigError(path.string(), "grid must be uniform over [-1, 1]");
    try {
        validate_density(d);
    } catch (const std::exception& e) {
        throw ConfigError(path.string(), e.what());
    }
    return d;
}

}  // namespace kuramoto
