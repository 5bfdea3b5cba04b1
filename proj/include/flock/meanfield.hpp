#pragma once

#include <cstdint>
#include <vector>

#include "flock/coupling.hpp"
#include "flock/dynamics.hpp"
#include "flock/ensemble.hpp"
#include "flock/ratefit.hpp"
#include "flock/transport.hpp"

namespace flock {

// Weighted characteristic flow: identical integrator to the particle system,
// with general quadrature weights in the force. Uniform weights reproduce
// simulate() bit-exactly.
TrajectoryRecord characteristics_flow(const AgentEnsemble& init, const ModelParams& params,
                                      double t_end, const SimOptions& opt);

// ---- empirical-measure Cauchy experiment ----

struct CauchyOpts {
    std::vector<int> n_list; // increasing
    double t_end = 1.0;
    int repeats = 4;
    SimOptions sim;
    std::uint64_t seed = 1;
    InitialSpec init;
};

struct CauchyResult {
    std::vector<int> n_list;
    std::vector<double> times; // {0, t_end}
    // w1[time][i][j]: repeat-averaged W1 between evolved empirical measures
    std::vector<std::vector<std::vector<double>>> w1;
    double max_ratio = 0.0; // max over pairs of W1(t_end)/W1(0)
};

CauchyResult empirical_cauchy_experiment(const ModelParams& params, const CauchyOpts& opts);

// ---- Dobrushin stability experiment ----

enum class StabilityRegime { general, fat_p_lt3, fat_p_eq3, fat_p_gt3 };

struct SupportBox {
    double x_lo = -1e300, x_hi = 1e300;
    double v_max = 1e300;
};

struct StabilityOpts {
    double t_end = 100.0;
    int samples = 40;
    double t_first = 1.0;
    SimOptions sim;
    SupportBox box;
    bool kernel_certified_fat = true; // custom kernels fall back to the general regime
    double slack = 0.2;
};

struct StabilityRun {
    StabilityRegime regime = StabilityRegime::general;
    std::vector<double> times, w1, ratio; // ratio = W1(t)/W1(0)
    double w1_initial = 0.0;
    // regime envelope: ratio(t) <= C * shape(t); C fitted as the window max
    double fitted_C = 0.0;
    bool envelope_pass = true;
    // growth diagnostics: slope of log ratio against log<t> (fat regimes)
    RateFit growth_fit;
    // local exponential rates of log ratio in t (general regime check)
    double rate_first_half = 0.0, rate_second_half = 0.0;
};

double stability_envelope_shape(StabilityRegime regime, double p, double alpha, double t);

StabilityRun stability_experiment(const AgentEnsemble& mu0, const AgentEnsemble& nu0,
                                  const ModelParams& params, const StabilityOpts& opts);

// ---- propagation-of-chaos experiment ----

struct PocOpts {
    std::vector<int> n_list;
    int k = 2;
    int m_reference = 4096;
    int replicas = 32;
    double t_end = 1.0;
    double grid_dt0 = 0.02;    // coupling grid step; grows ~ t when growth=true
    bool grid_growth = false;  // geometric step growth for long horizons
    double grid_dt_max = 4.0;
    std::vector<double> sample_times; // snapped to grid nodes; default {t_end}
    double fit_time = 1.0;            // abscissa for the N-scaling fit
    std::uint64_t seed = 1;
    InitialSpec init;
    double ref_rtol = 1e-8, ref_atol = 1e-10;
    bool store_marginals = false;
};

struct PocPerN {
    int n = 0;
    std::vector<double> P, K, se_P, se_K; // replica means, sum-over-agents convention
    std::vector<double> proxy, se_proxy;  // sqrt((k/n) 2 (P+K))
    // k-marginal phase rows at fit_time, one per replica (2*d*k columns)
    std::vector<std::vector<double>> marginal_system, marginal_meanfield;
};

struct PocResult {
    std::vector<double> times;
    std::vector<PocPerN> per_n;
    int k = 1;
    double fit_time = 1.0;
    RateFit slope; // log proxy(fit_time) vs log N
};

PocResult poc_experiment(const ModelParams& params, const PocOpts& opts);

// ---- kinetic diameter rates ----

struct KineticRateReport {
    StabilityRegime regime = StabilityRegime::general;
    bool compensated = false; // p == 3 path
    RateFit v_fit;
    double theory_exponent = 0.0;
    double tolerance = 0.1;
    RateFit d_fit;
    bool pass = false;
};

KineticRateReport kinetic_diameter_experiment(const AgentEnsemble& init, const ModelParams& params,
                                              double t_end, const SimOptions& opt, double fit_lo,
                                              double fit_hi, double tolerance);

} // namespace flock
