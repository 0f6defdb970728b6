#pragma once

#include <functional>
#include <span>

#include "vrc/types.hpp"

namespace vrc::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct Dopri5Options {
    double rtol = 1e-10;
    double atol = 1e-10;
    double initial_step = 0;  // 0 picks a step from the first derivative
    double min_step = 1e-14;
    long max_steps = 100'000'000;
};

/// Adaptive Dormand-Prince 5(4) with its 4th-order continuous extension.
/// Returns n_points x dim samples at t0, t0 + dt_out, ...
Matrix integrate_dopri5(const Rhs& rhs, const Vector& y0, double t0, double dt_out, Index n_points,
                        const Dopri5Options& options = {});

/// Scalar delay equation z'(t) = f(t, z(t), z(t - delay)) with constant history
/// z(t) = history for t <= 0. Fixed-step Dormand-Prince 5 on the grid k*dt;
/// delay/dt must be an integer. Delayed stage values come from cubic Hermite
/// interpolation of the stored grid solution and derivative.
using DelayRhs = std::function<double(double t, double z, double z_delayed)>;
Vector integrate_delay_fixed(const DelayRhs& rhs, double history, double dt, double delay, Index n_points);

}  // namespace vrc::ode
