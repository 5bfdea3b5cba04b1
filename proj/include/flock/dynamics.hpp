#pragma once

#include <cstdint>
#include <vector>

#include "flock/ensemble.hpp"
#include "flock/kernels.hpp"

namespace flock {

// acc_i = sum_j w_j phi(|x_i-x_j|) A(v_j-v_i); the self term vanishes since
// A(0)=0. Rows are independent (parallel-safe); each row accumulates with a
// fixed-order pairwise tree so the result does not depend on thread count.
void force_deterministic(const AgentEnsemble& ens, const KernelSpec& kernel,
                         const AlignmentSpec& align, double* acc);
std::vector<double> force_deterministic(const AgentEnsemble& ens, const KernelSpec& kernel,
                                        const AlignmentSpec& align);

DiameterStats diameters(const AgentEnsemble& ens);

enum class Scheme { euler, rk4, adaptive_rk45 };

struct StepResult {
    AgentEnsemble ensemble;
    double dt_taken = 0.0;
    double error_estimate = 0.0; // adaptive scheme only
};

// One integration step of the deterministic system. The adaptive scheme may
// take less than dt and reports the actually-taken size plus the local error
// estimate of the accepted step.
StepResult step(const AgentEnsemble& ens, const KernelSpec& kernel, const AlignmentSpec& align,
                double dt, Scheme scheme, double rtol = 1e-8, double atol = 1e-10);

struct SimOptions {
    Scheme scheme = Scheme::adaptive_rk45;
    double dt = 1e-3;   // fixed-step schemes
    double rtol = 1e-8; // adaptive
    double atol = 1e-10;
    int samples = 200;
    bool log_spacing = false;
    double t_first = 1e-2; // first positive sample when log-spaced
    bool store_snapshots = false;
    double freeze_velocity_below = 1e-12; // fully-aligned shortcut
};

std::vector<double> make_sample_times(double t_end, const SimOptions& opt);

TrajectoryRecord simulate(const AgentEnsemble& init, const ModelParams& params, double t_end,
                          const SimOptions& opt);

// Relative speed of the two-particle constant-kernel system, the separable
// closed form used as the oracle for adaptive integration.
double two_particle_speed(double w0, double p, double t);

} // namespace flock
