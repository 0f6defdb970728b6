#include "vrc/ode.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vrc/error.hpp"

namespace vrc::ode {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat (4th-order embedded weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct DenseWeights {
    double w1, w3, w4, w5, w6, w7;
};

// Continuous extension y(t + s h) = y + h sum_i w_i(s) k_i.
DenseWeights dense_weights(double s) {
    const double x1 = 5.0 * (2558722523.0 - 31403016.0 * s) / 11282082432.0;
    const double x3 = 100.0 * (882725551.0 - 15701508.0 * s) / 32700410799.0;
    const double x4 = 25.0 * (443332067.0 - 31403016.0 * s) / 1880347072.0;
    const double x5 = 32805.0 * (23143187.0 - 3489224.0 * s) / 199316789632.0;
    const double x6 = 55.0 * (29972135.0 - 7076736.0 * s) / 822651844.0;
    const double x7 = 10.0 * (7414447.0 - 829305.0 * s) / 29380423.0;
    const double sm1 = s - 1.0, s2 = s * s;
    const double A = s2 * (3.0 - 2.0 * s);
    const double B = s2 * sm1;
    const double C = s2 * sm1 * sm1;
    const double D = s * sm1 * sm1;
    return {A * b1 - C * x1 + D, A * b3 + C * x3, A * b4 - C * x4, A * b5 + C * x5, A * b6 - C * x6, B + C * x7};
}

}  // namespace

Matrix integrate_dopri5(const Rhs& rhs, const Vector& y0, double t0, double dt_out, Index n_points,
                        const Dopri5Options& opt) {
    if (!(dt_out > 0.0)) throw InvalidInput("output step must be positive");
    if (n_points < 1) throw InvalidInput("need at least one output point");
    const Index dim = y0.size();
    Matrix out(n_points, dim);
    out.row(0) = y0.transpose();
    if (n_points == 1) return out;

    auto call = [&](double t, const Vector& y, Vector& dy) {
        rhs(t, {y.data(), static_cast<std::size_t>(dim)}, {dy.data(), static_cast<std::size_t>(dim)});
    };

    Vector y = y0, k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim), y_new(dim);
    double t = t0;
    call(t, y, k1);
    double h = opt.initial_step;
    if (h <= 0.0) {
        const double scale = opt.atol + opt.rtol * y.cwiseAbs().maxCoeff();
        const double dnorm = k1.cwiseAbs().maxCoeff();
        h = dnorm > 0.0 ? 0.01 * scale / dnorm : dt_out;
        h = std::clamp(h, 1e-6 * dt_out, dt_out);
    }
    const double t_end = t0 + dt_out * static_cast<double>(n_points - 1);
    Index next = 1;
    long steps = 0;
    while (next < n_points) {
        if (++steps > opt.max_steps) throw SimulationError("Dormand-Prince exceeded the step budget");
        if (h < opt.min_step) throw SimulationError("Dormand-Prince step size underflow at t=" + std::to_string(t));
        h = std::min(h, t_end - t);
        tmp = y + h * a21 * k1;
        call(t + c2 * h, tmp, k2);
        tmp = y + h * (a31 * k1 + a32 * k2);
        call(t + c3 * h, tmp, k3);
        tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        call(t + c4 * h, tmp, k4);
        tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        call(t + c5 * h, tmp, k5);
        tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        call(t + h, tmp, k6);
        y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        call(t + h, y_new, k7);

        double err = 0.0;
        for (Index i = 0; i < dim; ++i) {
            const double e = h * (e1 * k1(i) + e3 * k3(i) + e4 * k4(i) + e5 * k5(i) + e6 * k6(i) + e7 * k7(i));
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / static_cast<double>(std::max<Index>(dim, 1)));
        if (!std::isfinite(err)) throw SimulationError("non-finite state during integration");

        if (err <= 1.0) {
            const double t_new = t + h;
            while (next < n_points) {
                const double t_out = t0 + dt_out * static_cast<double>(next);
                if (t_out > t_new + 1e-12 * dt_out) break;
                const double s = std::clamp((t_out - t) / h, 0.0, 1.0);
                const DenseWeights w = dense_weights(s);
                out.row(next) =
                    (y + h * (w.w1 * k1 + w.w3 * k3 + w.w4 * k4 + w.w5 * k5 + w.w6 * k6 + w.w7 * k7)).transpose();
                ++next;
            }
            t = t_new;
            y = y_new;
            k1 = k7;
            const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            h *= factor;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return out;
}

Vector integrate_delay_fixed(const DelayRhs& rhs, double history, double dt, double delay, Index n_points) {
    if (!(dt > 0.0)) throw InvalidInput("delay integration step must be positive");
    const double ratio = delay / dt;
    const Index lag = static_cast<Index>(std::llround(ratio));
    if (lag < 1 || std::abs(ratio - static_cast<double>(lag)) > 1e-9 * std::max(1.0, ratio))
        throw InvalidInput("delay must be a positive integer multiple of the step");
    if (n_points < 1) throw InvalidInput("need at least one output point");

    std::vector<double> z(static_cast<std::size_t>(n_points)), dz(static_cast<std::size_t>(n_points));
    // Delayed value at grid interval `start` (from t_start to t_start+dt), fraction s.
    auto delayed = [&](Index start, double s) {
        if (start + 1 <= 0) return history;
        const double h = dt;
        const double y0 = z[start], y1 = z[start + 1], f0 = dz[start], f1 = dz[start + 1];
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * y1 +
               (s3 - s2) * h * f1;
    };
    z[0] = history;
    dz[0] = rhs(0.0, history, history);
    const double h = dt;
    for (Index k = 0; k + 1 < n_points; ++k) {
        const double t = static_cast<double>(k) * h;
        const Index start = k - lag;
        const double zk = z[k];
        const double s1 = dz[k];
        const double s2 = rhs(t + c2 * h, zk + h * a21 * s1, delayed(start, c2));
        const double s3 = rhs(t + c3 * h, zk + h * (a31 * s1 + a32 * s2), delayed(start, c3));
        const double s4 = rhs(t + c4 * h, zk + h * (a41 * s1 + a42 * s2 + a43 * s3), delayed(start, c4));
        const double s5 = rhs(t + c5 * h, zk + h * (a51 * s1 + a52 * s2 + a53 * s3 + a54 * s4), delayed(start, c5));
        const double dl = start + 1 <= 0 ? history : z[start + 1];
        const double s6 = rhs(t + h, zk + h * (a61 * s1 + a62 * s2 + a63 * s3 + a64 * s4 + a65 * s5), dl);
        const double next = zk + h * (b1 * s1 + b3 * s3 + b4 * s4 + b5 * s5 + b6 * s6);
        if (!std::isfinite(next)) throw SimulationError("non-finite state in delay integration");
        z[k + 1] = next;
        dz[k + 1] = rhs(t + h, next, dl);
    }
    return Eigen::Map<Vector>(z.data(), n_points);
}

}  // namespace vrc::ode
