#pragma once

#include <cstdint>
#include <vector>

#include "flock/ensemble.hpp"

namespace flock {

// Paired trajectories: a finite-N system against matched mean-field
// characteristics sharing initial data (and, in the stochastic case, the
// Brownian increments). P/K follow the sum-over-agents convention
// P = 1/2 E sum_i |x_i - xbar_i|^2 (so P ~ t^2, K ~ 1 in the flocking
// regime); E is the per-agent expected divergence E|x-xbar|^2 + |v-vbar|^2.
struct CouplingRun {
    ModelParams params;
    int n = 0;
    int k = 1;            // marginal size used by the PoC proxy
    int m_reference = 0;  // reference ensemble size
    int replica_count = 0;
    std::uint64_t seed = 0;

    std::vector<double> times;

    // deterministic coupling functionals (replica means) and stderr
    std::vector<double> P, K, se_P, se_K;
    // PoC proxy sqrt((k/n) * 2 (P+K)) and stderr
    std::vector<double> proxy, se_proxy;

    // stochastic expected divergence (per-agent means) and stderr
    std::vector<double> E_x, E_v, E, se_E;

    // optional per-sample states for observable errors:
    // states[s][r] = N-system ensemble of replica r at sample s
    std::vector<std::vector<AgentEnsemble>> states;
    // reference ensemble snapshot at each sample
    std::vector<AgentEnsemble> reference_states;

    // diagnostics (stochastic runs)
    double martingale_mean = 0.0, martingale_se = 0.0;
    double min_strength_seen = 1.0;
    double exp_moment_c0 = 0.0; // largest feasible c0 in e^{c0 |v|^{p-1}} on the reference
};

} // namespace flock
