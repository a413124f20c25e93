#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kuramoto {

/// Scratch buffers for the classical fourth-order Runge-Kutta step.
struct Rk4Workspace {
    std::vector<double> k1, k2, k3, k4, tmp;

    void resize(std::size_t n) {
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
        tmp.resize(n);
    }
};

/// Advances y by one step of size h. `f(t, y, dy)` writes the derivative of
/// y at time t into dy. The stage evaluation order is fixed, so results are
/// bit-reproducible for identical inputs.
template <class F>
void rk4_step(F&& f, double t, double h, std::vector<double>& y, Rk4Workspace& ws) {
    const std::size_t n = y.size();
    ws.resize(n);
    f(t, std::span<const double>(y), std::span<double>(ws.k1));
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * h * ws.k1[i];
    f(t + 0.5 * h, std::span<const double>(ws.tmp), std::span<double>(ws.k2));
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + 0.5 * h * ws.k2[i];
    f(t + 0.5 * h, std::span<const double>(ws.tmp), std::span<double>(ws.k3));
    for (std::size_t i = 0; i < n; ++i) ws.tmp[i] = y[i] + h * ws.k3[i];
    f(t + h, std::span<const double>(ws.tmp), std::span<double>(ws.k4));
    for (std::size_t i = 0; i < n; ++i) y[i] += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
}

}  // namespace kuramoto
