#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "flock/dynamics.hpp"
#include "flock/stochastic.hpp"

using namespace flock;

namespace {

ModelParams torus_params(double p, double alpha, double sigma2, int d = 2, double L = 1.0) {
    ModelParams mp;
    mp.align.p = p;
    mp.kernel = KernelSpec::power(alpha);
    mp.noise = NoiseSpec::linear(sigma2);
    mp.dim = d;
    mp.domain.type = Domain::Type::torus;
    mp.domain.period = L;
    return mp;
}

AgentEnsemble torus_ensemble(int n, int d, std::uint64_t seed, double vr = 1.0) {
    InitialSpec init;
    init.seed = seed;
    init.vradius = vr;
    AgentEnsemble e = sample_ensemble(init, n, d);
    torus_canonicalize(e, 1.0);
    return e;
}

} // namespace

TEST_CASE("torus metric: wrap-around identification and min-image") {
    double a[2] = {0.1, 0.9}, b[2] = {1.1, -0.1};
    CHECK(torus_dist2(a, b, 2, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
    double c[2] = {0.05, 0.5}, e[2] = {0.95, 0.5};
    CHECK(std::sqrt(torus_dist2(c, e, 2, 1.0)) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(torus_wrap(-0.25, 1.0) == doctest::Approx(0.75));
    CHECK(torus_wrap(2.25, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("strength examples and bounds") {
    ModelParams mp = torus_params(2.5, 0.5, 0.1);
    AgentEnsemble one = AgentEnsemble::zeros(1, 2);
    StrengthVector s1 = strength(one, 1.0, mp.kernel);
    CHECK(s1.s[0] == doctest::Approx(1.0)); // self term only

    AgentEnsemble coincident = AgentEnsemble::zeros(5, 2);
    for (int i = 0; i < 5; ++i) {
        coincident.x(i)[0] = 0.3;
        coincident.x(i)[1] = 0.7;
    }
    StrengthVector sc = strength(coincident, 1.0, mp.kernel);
    for (double v : sc.s) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    AgentEnsemble two = AgentEnsemble::zeros(2, 2);
    two.positions = {0.1, 0.5, 0.4, 0.5}; // torus distance 0.3
    StrengthVector s2 = strength(two, 1.0, mp.kernel);
    double want = 0.5 * (1.0 + phi_eval(mp.kernel, 0.3));
    CHECK(s2.s[0] == doctest::Approx(want).epsilon(1e-13));
    CHECK(s2.s[1] == doctest::Approx(want).epsilon(1e-13));

    AgentEnsemble big = torus_ensemble(40, 2, 9);
    StrengthVector sb = strength(big, 1.0, mp.kernel);
    for (double v : sb.s) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0 + 1e-14);
    }
}

TEST_CASE("noise path regenerates increments bit-exactly") {
    NoisePath p{12345};
    double a = p.gaussian(7, 3, 1);
    double b = p.gaussian(7, 3, 1);
    CHECK(a == b);
    NoisePath q{12345};
    CHECK(q.gaussian(7, 3, 1) == a);
    // distinct indices decorrelate
    CHECK(p.gaussian(7, 3, 0) != a);
    CHECK(p.gaussian(8, 3, 1) != a);
    CHECK(NoisePath{54321}.gaussian(7, 3, 1) != a);
    // increments are standard normal to Monte Carlo accuracy
    double m = 0.0, m2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double g = p.gaussian(i, 0, 0);
        m += g;
        m2 += g * g;
    }
    m /= n;
    m2 /= n;
    CHECK(std::fabs(m) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("em_step with zero noise reduces to torus euler step") {
    ModelParams mp = torus_params(2.5, 0.25, 0.0);
    AgentEnsemble e = torus_ensemble(10, 2, 21);
    AgentEnsemble e2 = e;
    NoisePath path{99};
    double dt = 1e-3;
    em_step(e, 1.0, mp, path, 0, dt);
    // manual Euler with torus force
    std::vector<double> drift(20), s(10);
    em_drift(e2, 1.0, mp, drift.data(), s.data());
    for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 2; ++k) {
            double xk = torus_wrap(e2.x(i)[k] + e2.v(i)[k] * dt, 1.0);
            double vk = e2.v(i)[k] + drift[2 * i + k] * dt;
            CHECK(e.x(i)[k] == xk);
            CHECK(e.v(i)[k] == vk);
        }
}

TEST_CASE("em trajectories are deterministic given the seed") {
    ModelParams mp = torus_params(2.5, 0.25, 0.3);
    AgentEnsemble a = torus_ensemble(8, 2, 5);
    AgentEnsemble b = a;
    NoisePath p1{777}, p2{777};
    for (int s = 0; s < 50; ++s) {
        em_step(a, 1.0, mp, p1, s, 1e-3);
        em_step(b, 1.0, mp, p2, s, 1e-3);
    }
    for (std::size_t i = 0; i < a.velocities.size(); ++i) {
        CHECK(a.velocities[i] == b.velocities[i]);
        CHECK(a.positions[i] == b.positions[i]);
    }
}

TEST_CASE("single agent: driftless diffusion with variance 2 h(1) t") {
    ModelParams mp = torus_params(2.5, 0.25, 2.0); // h(1) = 2
    const int R = 10000;
    const double t_end = 0.5, dt = 1e-3;
    const int steps = int(t_end / dt);
    double sum2 = 0.0;
    int cnt = 0;
    for (int r = 0; r < R; ++r) {
        AgentEnsemble e = AgentEnsemble::zeros(1, 2);
        e.positions = {0.5, 0.5};
        NoisePath path{substream(42, std::uint64_t(r))};
        for (int s = 0; s < steps; ++s) em_step(e, 1.0, mp, path, std::uint64_t(s), dt);
        for (int k = 0; k < 2; ++k) {
            sum2 += e.v(0)[k] * e.v(0)[k];
            ++cnt;
        }
    }
    double var = sum2 / cnt;
    CHECK(var == doctest::Approx(2.0 * 2.0 * t_end).epsilon(0.05));
}

TEST_CASE("mv step: one-point reference is a single-node quadrature") {
    ModelParams mp = torus_params(3.0, 0.5, 0.0);
    AgentEnsemble ref = AgentEnsemble::zeros(1, 2);
    ref.positions = {0.25, 0.5};
    ref.velocities = {0.4, -0.2};
    AgentEnsemble tr = torus_ensemble(6, 2, 3);
    std::vector<double> drift(12), s(6);
    mv_drift(tr, ref, 1.0, mp, drift.data(), s.data());
    for (int i = 0; i < 6; ++i) {
        double r = std::sqrt(torus_dist2(ref.x(0), tr.x(i), 2, 1.0));
        double phi = phi_eval(mp.kernel, r);
        double dv[2] = {ref.v(0)[0] - tr.v(i)[0], ref.v(0)[1] - tr.v(i)[1]};
        double n = std::hypot(dv[0], dv[1]);
        for (int k = 0; k < 2; ++k)
            CHECK(drift[2 * i + k] == doctest::Approx(phi * n * dv[k]).epsilon(1e-13));
        CHECK(s[i] == doctest::Approx(phi).epsilon(1e-13));
    }
}

TEST_CASE("mv step with reference = ensemble itself reproduces em drift") {
    ModelParams mp = torus_params(2.5, 0.25, 0.2);
    AgentEnsemble e = torus_ensemble(12, 2, 13);
    std::vector<double> d1(24), s1(12), d2(24), s2(12);
    em_drift(e, 1.0, mp, d1.data(), s1.data());
    mv_drift(e, e, 1.0, mp, d2.data(), s2.data());
    for (int i = 0; i < 24; ++i) CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-12));
    for (int i = 0; i < 12; ++i) CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-12));
    // dropping the self atom perturbs the drift at O(1/N)
    AgentEnsemble no_self = AgentEnsemble::zeros(11, 2);
    for (int j = 1; j < 12; ++j) {
        for (int k = 0; k < 2; ++k) {
            no_self.x(j - 1)[k] = e.x(j)[k];
            no_self.v(j - 1)[k] = e.v(j)[k];
        }
    }
    AgentEnsemble first = AgentEnsemble::zeros(1, 2);
    for (int k = 0; k < 2; ++k) {
        first.x(0)[k] = e.x(0)[k];
        first.v(0)[k] = e.v(0)[k];
    }
    std::vector<double> d3(2), s3(1);
    mv_drift(first, no_self, 1.0, mp, d3.data(), s3.data());
    // the self atom carries weight 1/N and contributes zero force, so the
    // difference is (1/(N-1) - 1/N) sum_j != 1/N-scaled terms
    for (int k = 0; k < 2; ++k) {
        double diff = std::fabs(d3[k] - d1[k]);
        CHECK(diff <= 2.0 / 12.0 * (std::fabs(d3[k]) + 1.0));
        CHECK(diff > 0.0);
    }
    CHECK_THROWS_AS(mv_drift(first, AgentEnsemble{}, 1.0, mp, d3.data(), s3.data()),
                    ParameterError);
}

TEST_CASE("mv step with zero noise and frozen reference is deterministic transport") {
    ModelParams mp = torus_params(2.5, 0.25, 0.0);
    AgentEnsemble ref = torus_ensemble(50, 2, 7);
    AgentEnsemble tr = torus_ensemble(4, 2, 8);
    AgentEnsemble tr2 = tr;
    NoisePath path{1};
    mv_characteristics_step(tr, ref, 1.0, mp, path, 0, 1e-3);
    // identical manual update
    std::vector<double> drift(8), s(4);
    mv_drift(tr2, ref, 1.0, mp, drift.data(), s.data());
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 2; ++k) {
            double xk = torus_wrap(tr2.x(i)[k] + tr2.v(i)[k] * 1e-3, 1.0);
            CHECK(tr.x(i)[k] == xk);
            CHECK(tr.v(i)[k] == tr2.v(i)[k] + drift[2 * i + k] * 1e-3);
        }
}

TEST_CASE("coupled run: E(0) = 0, replicas independent, martingale neutral") {
    ModelParams mp = torus_params(2.5, 0.25, 0.1);
    StochCouplingOpts opts;
    opts.n_list = {16};
    opts.m_reference = 128;
    opts.replicas = 32;
    opts.dt = 2e-3;
    opts.t_end = 0.25;
    opts.sample_count = 2;
    opts.seed = 99;
    auto runs = coupled_run(mp, opts);
    REQUIRE(runs.size() == 1);
    const CouplingRun& run = runs[0];
    CHECK(run.E[0] == 0.0);
    CHECK(run.E_x[0] == 0.0);
    CHECK(run.E_v[0] == 0.0);
    CHECK(run.E.back() > 0.0);
    CHECK(run.min_strength_seen > 0.0);
    CHECK(run.exp_moment_c0 > 0.0);
    // martingale term averages to zero within 3 standard errors
    CHECK(std::fabs(run.martingale_mean) <= 3.0 * run.martingale_se + 1e-12);
}

TEST_CASE("coupled run reproducibility: same seed gives identical series") {
    ModelParams mp = torus_params(2.5, 0.25, 0.1);
    StochCouplingOpts opts;
    opts.n_list = {8};
    opts.m_reference = 64;
    opts.replicas = 4;
    opts.dt = 2e-3;
    opts.t_end = 0.1;
    opts.seed = 31;
    auto r1 = coupled_run(mp, opts);
    auto r2 = coupled_run(mp, opts);
    for (std::size_t s = 0; s < r1[0].E.size(); ++s) CHECK(r1[0].E[s] == r2[0].E[s]);
}

TEST_CASE("observable catalog and t=0 CLT variance") {
    CHECK_THROWS_AS(make_observable("nope", 2), ParameterError);

    ModelParams mp = torus_params(2.5, 0.25, 0.1);
    StochCouplingOpts opts;
    opts.n_list = {64};
    opts.m_reference = 16384;
    opts.replicas = 3000;
    opts.dt = 1e-3;
    opts.t_end = 0.0; // sampling only
    opts.seed = 2718;
    opts.store_states = true;
    auto runs = coupled_run(mp, opts);
    const CouplingRun& run = runs[0];

    // constant observable: exactly zero error
    auto err_one = observable_error(run, "one");
    CHECK(err_one[0] == 0.0);

    // v0 ~ first coordinate of a uniform unit-ball draw in 2-D: Var = 1/4
    auto err = observable_error(run, "v0");
    double want = 0.25 / 64.0;
    CHECK(err[0] == doctest::Approx(want).epsilon(0.12));
}
