#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "flock/errors.hpp"

namespace flock {

// Generic explicit steppers on flat state vectors.
// RHS signature: void(double t, const std::vector<double>& y, std::vector<double>& dydt)

template <class RHS>
void euler_step(const RHS& rhs, double t, std::vector<double>& y, double dt,
                std::vector<double>& k1) {
    rhs(t, y, k1);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += dt * k1[i];
}

template <class RHS>
void rk4_step(const RHS& rhs, double t, std::vector<double>& y, double dt,
              std::vector<std::vector<double>>& work) {
    const std::size_t n = y.size();
    work.resize(5);
    for (auto& w : work) w.resize(n);
    auto& k1 = work[0];
    auto& k2 = work[1];
    auto& k3 = work[2];
    auto& k4 = work[3];
    auto& tmp = work[4];
    rhs(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    rhs(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    rhs(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Dormand-Prince 5(4) with PI-free step control. Integrates from t0 to t1,
// calling `observe(t, y)` after every accepted step when provided.
struct AdaptiveOpts {
    double rtol = 1e-8;
    double atol = 1e-10;
    double dt_init = 1e-3;
    double dt_min = 1e-14;
    double dt_max = 1e9;
};

template <class RHS>
class Dopri5 {
public:
    Dopri5(RHS rhs, AdaptiveOpts opts) : rhs_(rhs), o_(opts) {}

    // One attempted step from (t, y) with trial size dt. On acceptance
    // updates y,t in place. Returns suggested next dt; sets accepted flag
    // and the error estimate of the attempt.
    double attempt(double& t, std::vector<double>& y, double dt, bool& accepted, double& err_out) {
        const std::size_t n = y.size();
        for (auto& k : k_) k.resize(n);
        ytmp_.resize(n);
        y5_.resize(n);
        if (!have_k1_) {
            rhs_(t, y, k_[0]);
            have_k1_ = true;
        }
        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j) acc += A[s][j] * k_[j][i];
                ytmp_[i] = y[i] + dt * acc;
            }
            rhs_(t + C[s] * dt, ytmp_, k_[s]);
        }
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double y5 = y[i], e = 0.0;
            for (int j = 0; j < 7; ++j) {
                y5 += dt * B5[j] * k_[j][i];
                e += dt * E[j] * k_[j][i];
            }
            y5_[i] = y5;
            double sc = o_.atol + o_.rtol * std::max(std::fabs(y[i]), std::fabs(y5));
            double q = e / sc;
            err += q * q;
        }
        err = std::sqrt(err / double(n));
        if (!std::isfinite(err)) err = 1e10;
        err_out = err;
        accepted = err <= 1.0;
        double fac = 0.9 * std::pow(std::max(err, 1e-12), -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        double dt_next = std::clamp(dt * fac, o_.dt_min, o_.dt_max);
        if (accepted) {
            t += dt;
            y.swap(y5_);
            k_[0].swap(k_[6]); // FSAL
        } else {
            have_k1_ = true; // k1 still valid for same (t,y)
        }
        if (!accepted) return dt_next;
        return dt_next;
    }

    // Integrate to t1 exactly; throws IntegrationError if dt collapses.
    template <class Observer>
    void integrate(double& t, std::vector<double>& y, double t1, Observer&& observe) {
        double dt = std::min(o_.dt_init, std::max(t1 - t, 0.0));
        if (dt <= 0.0) return;
        while (t < t1) {
            bool clipped = false;
            double step = dt;
            if (t + step >= t1) {
                step = t1 - t;
                clipped = true;
            }
            bool ok;
            double err;
            double dt_next = attempt(t, y, step, ok, err);
            if (ok) {
                observe(t, y);
                dt = clipped ? std::max(dt, dt_next) : dt_next;
            } else {
                dt = dt_next;
                if (dt <= o_.dt_min * 2.0)
                    throw IntegrationError("adaptive step size underflow", t);
            }
        }
    }

    void reset() { have_k1_ = false; }

private:
    RHS rhs_;
    AdaptiveOpts o_;
    std::vector<double> k_[7];
    std::vector<double> ytmp_, y5_;
    bool have_k1_ = false;

    static constexpr double C[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double A[7][6] = {
        {0, 0, 0, 0, 0, 0},
        {1.0 / 5, 0, 0, 0, 0, 0},
        {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
        {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
    static constexpr double B5[7] = {35.0 / 384,     0.0,          500.0 / 1113, 125.0 / 192,
                                     -2187.0 / 6784, 11.0 / 84,    0.0};
    static constexpr double B4[7] = {5179.0 / 57600,  0.0,           7571.0 / 16695, 393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
    static constexpr double E[7] = {B5[0] - B4[0], 0.0,           B5[2] - B4[2], B5[3] - B4[3],
                                    B5[4] - B4[4], B5[5] - B4[5], B5[6] - B4[6]};
};

} // namespace flock
