#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flock/coupling.hpp"
#include "flock/ensemble.hpp"
#include "flock/kernels.hpp"
#include "flock/rng.hpp"

namespace flock {

// ---- torus geometry ----

double torus_wrap(double x, double period);
// squared minimum-image distance
double torus_dist2(const double* a, const double* b, int dim, double period);
void torus_canonicalize(AgentEnsemble& ens, double period);

// ---- strength function ----

struct StrengthVector {
    std::vector<double> s;
};

// s_i = sum_j w_j phi(dist_torus(x_i, x_j)); with uniform weights this is the
// (1/N) sum phi of the stochastic model. Includes the self term phi(0).
StrengthVector strength(const AgentEnsemble& ens, double period, const KernelSpec& kernel);

// ---- Euler-Maruyama steps ----

// One EM step of the interacting system: x += v dt (wrapped), v += drift dt
// + sqrt(2 h(s_i) dt) xi. Deterministic given (state, path, step_index).
void em_step(AgentEnsemble& ens, double period, const ModelParams& params, const NoisePath& path,
             std::uint64_t step_index, double dt);

// One EM step of McKean-Vlasov characteristics: drift and noise amplitude
// come from the reference ensemble (an independent approximation of the law
// f); tracked agents do not interact with each other.
void mv_characteristics_step(AgentEnsemble& tracked, const AgentEnsemble& reference, double period,
                             const ModelParams& params, const NoisePath& path,
                             std::uint64_t step_index, double dt);

// drift + strength evaluation helpers (exposed for tests)
void em_drift(const AgentEnsemble& ens, double period, const ModelParams& params, double* acc,
              double* strength_out);
void mv_drift(const AgentEnsemble& tracked, const AgentEnsemble& reference, double period,
              const ModelParams& params, double* acc, double* strength_out);

// ---- synchronous coupling experiment ----

struct StochCouplingOpts {
    std::vector<int> n_list;   // particle counts (one CouplingRun per entry)
    int m_reference = 2048;    // reference ensemble size
    int replicas = 8;
    double dt = 2e-3;
    double t_end = 1.0;
    int sample_count = 8;      // uniform samples on (0, t_end]
    std::uint64_t seed = 1;
    InitialSpec init;          // positions wrapped into [0, period)
    bool store_states = false; // keep per-replica system states at samples
};

// Runs, for each N in n_list: R replicas of the N-particle system coupled to
// N mean-field characteristics driven by one shared M-particle reference and
// the same Brownian increments. Returns one CouplingRun per N.
std::vector<CouplingRun> coupled_run(const ModelParams& params, const StochCouplingOpts& opts);

// ---- observables ----

struct Observable {
    std::string id;
    double lipschitz = 1.0;
    double (*fn)(const double* x, const double* v, int dim) = nullptr;
};

// catalog: "one", "x0".."x2", "v0".."v2", "bump" (exp(-|v|^2))
Observable make_observable(const std::string& id, int dim);

// Squared observable gap between the empirical measure of the N system and
// the reference-law integral, replica-averaged, one value per sample time.
// Requires the run to have stored states.
std::vector<double> observable_error(const CouplingRun& run, const std::string& id);

} // namespace flock
