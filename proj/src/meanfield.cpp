#include "flock/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include "flock/ode.hpp"
#include "flock/reduction.hpp"

namespace flock {

TrajectoryRecord characteristics_flow(const AgentEnsemble& init, const ModelParams& params,
                                      double t_end, const SimOptions& opt) {
    double wsum = 0.0;
    for (double w : init.weights) wsum += w;
    if (std::fabs(wsum - 1.0) > 1e-12)
        throw ParameterError("characteristics_flow: weights must sum to 1");
    return simulate(init, params, t_end, opt);
}

// ---------------------------------------------------------------- Cauchy --

CauchyResult empirical_cauchy_experiment(const ModelParams& params, const CauchyOpts& opts) {
    if (opts.n_list.size() < 2) throw ParameterError("cauchy experiment needs >= 2 sizes");
    for (std::size_t i = 1; i < opts.n_list.size(); ++i)
        if (opts.n_list[i] <= opts.n_list[i - 1])
            throw ParameterError("cauchy experiment: n_list must be increasing");

    const int nN = int(opts.n_list.size());
    CauchyResult res;
    res.n_list = opts.n_list;
    res.times = {0.0, opts.t_end};
    res.w1.assign(2, std::vector<std::vector<double>>(nN, std::vector<double>(nN, 0.0)));

    int n_max = opts.n_list.back();
    for (int rep = 0; rep < opts.repeats; ++rep) {
        InitialSpec init = opts.init;
        init.seed = substream(opts.seed, std::uint64_t(rep));
        AgentEnsemble master = sample_ensemble(init, n_max, params.dim);
        // nested prefixes
        std::vector<AgentEnsemble> initial(nN), final_state(nN);
        for (int q = 0; q < nN; ++q) {
            int n = opts.n_list[q];
            AgentEnsemble e = AgentEnsemble::zeros(n, params.dim);
            std::copy(master.positions.begin(), master.positions.begin() + std::size_t(n) * params.dim,
                      e.positions.begin());
            std::copy(master.velocities.begin(),
                      master.velocities.begin() + std::size_t(n) * params.dim,
                      e.velocities.begin());
            initial[q] = e;
            SimOptions so = opts.sim;
            so.samples = 2;
            so.store_snapshots = true;
            TrajectoryRecord tr = simulate(e, params, opts.t_end, so);
            final_state[q] = tr.snapshots.back();
        }
        for (int a = 0; a < nN; ++a)
            for (int b = a + 1; b < nN; ++b) {
                double d0 = wasserstein1(phase_cloud(initial[a]), phase_cloud(initial[b]));
                double d1 = wasserstein1(phase_cloud(final_state[a]), phase_cloud(final_state[b]));
                res.w1[0][a][b] += d0 / opts.repeats;
                res.w1[0][b][a] = res.w1[0][a][b];
                res.w1[1][a][b] += d1 / opts.repeats;
                res.w1[1][b][a] = res.w1[1][a][b];
            }
    }
    for (int a = 0; a < nN; ++a)
        for (int b = a + 1; b < nN; ++b)
            if (res.w1[0][a][b] > 0.0)
                res.max_ratio = std::max(res.max_ratio, res.w1[1][a][b] / res.w1[0][a][b]);
    return res;
}

// ------------------------------------------------------------- stability --

double stability_envelope_shape(StabilityRegime regime, double p, double alpha, double t) {
    double br = jbracket(t);
    switch (regime) {
        case StabilityRegime::fat_p_lt3:
            return br * std::log(br);
        case StabilityRegime::fat_p_eq3: {
            double th = 1.0 / (1.0 - alpha);
            double lg = std::log(br);
            return std::pow(lg, th) * std::exp(std::pow(lg, th));
        }
        case StabilityRegime::fat_p_gt3: {
            double g = (1.0 + alpha) * (p - 3.0) / (2.0 * (p - alpha - 2.0));
            return std::pow(br, g) * std::exp(std::pow(br, g));
        }
        case StabilityRegime::general:
            return std::exp(t);
    }
    return 1.0;
}

static void check_support(const AgentEnsemble& e, const SupportBox& box) {
    for (int i = 0; i < e.n; ++i) {
        for (int k = 0; k < e.dim; ++k)
            if (e.x(i)[k] < box.x_lo || e.x(i)[k] > box.x_hi)
                throw ParameterError("stability experiment: initial positions leave the support box");
        double n2 = 0.0;
        for (int k = 0; k < e.dim; ++k) n2 += e.v(i)[k] * e.v(i)[k];
        if (std::sqrt(n2) > box.v_max)
            throw ParameterError("stability experiment: initial velocities leave the support box");
    }
}

StabilityRun stability_experiment(const AgentEnsemble& mu0, const AgentEnsemble& nu0,
                                  const ModelParams& params, const StabilityOpts& opts) {
    mu0.validate();
    nu0.validate();
    check_support(mu0, opts.box);
    check_support(nu0, opts.box);

    StabilityRun run;
    double p = params.align.p;
    if (!opts.kernel_certified_fat || params.kernel.form != KernelForm::power_law)
        run.regime = StabilityRegime::general;
    else if (p < 3.0)
        run.regime = StabilityRegime::fat_p_lt3;
    else if (p == 3.0)
        run.regime = StabilityRegime::fat_p_eq3;
    else
        run.regime = StabilityRegime::fat_p_gt3;

    run.w1_initial = wasserstein1(phase_cloud(mu0), phase_cloud(nu0));

    SimOptions so = opts.sim;
    so.samples = opts.samples;
    so.log_spacing = true;
    so.t_first = opts.t_first;
    so.store_snapshots = true;
    TrajectoryRecord tmu = simulate(mu0, params, opts.t_end, so);
    TrajectoryRecord tnu = simulate(nu0, params, opts.t_end, so);

    for (std::size_t s = 0; s < tmu.times.size(); ++s) {
        double w = wasserstein1(phase_cloud(tmu.snapshots[s]), phase_cloud(tnu.snapshots[s]));
        run.times.push_back(tmu.times[s]);
        run.w1.push_back(w);
        run.ratio.push_back(run.w1_initial > 0.0 ? w / run.w1_initial : 0.0);
    }

    // Envelope constant: max of ratio/shape over the checked window (t >= t_first).
    double C = 0.0;
    for (std::size_t s = 0; s < run.times.size(); ++s) {
        double t = run.times[s];
        if (t < opts.t_first) continue;
        double shape = stability_envelope_shape(run.regime, p, params.kernel.alpha, t);
        if (shape > 0.0) C = std::max(C, run.ratio[s] / shape);
    }
    run.fitted_C = C;
    run.envelope_pass = true;
    for (std::size_t s = 0; s < run.times.size(); ++s) {
        double t = run.times[s];
        if (t < opts.t_first) continue;
        double shape = stability_envelope_shape(run.regime, p, params.kernel.alpha, t);
        if (!(run.ratio[s] <= (1.0 + opts.slack) * C * shape + 1e-12)) run.envelope_pass = false;
        if (!std::isfinite(run.ratio[s])) run.envelope_pass = false;
    }

    // growth diagnostics
    std::vector<double> ts, rs;
    for (std::size_t s = 0; s < run.times.size(); ++s)
        if (run.times[s] >= opts.t_first && run.ratio[s] > 0.0) {
            ts.push_back(run.times[s]);
            rs.push_back(run.ratio[s]);
        }
    if (ts.size() >= 8) run.growth_fit = fit_power_law(ts, rs, ts.front(), ts.back());

    // local exponential rates on first/second half (general-regime check)
    if (ts.size() >= 4) {
        std::size_t half = ts.size() / 2;
        std::vector<double> t1(ts.begin(), ts.begin() + half), t2(ts.begin() + half, ts.end());
        std::vector<double> l1, l2;
        for (std::size_t i = 0; i < half; ++i) l1.push_back(std::log(rs[i]));
        for (std::size_t i = half; i < ts.size(); ++i) l2.push_back(std::log(rs[i]));
        run.rate_first_half = fit_linear(t1, l1).exponent;
        run.rate_second_half = fit_linear(t2, l2).exponent;
    }
    return run;
}

// ------------------------------------------------------------------- PoC --

namespace {

// force on tracked rows from a stored reference state (free space)
void cross_force(const double* tx, const double* tv, int n, const double* ry, const double* rv,
                 const double* rw, int m, int d, const KernelEval& kern, const AlignEval& al,
                 double* acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* xi = tx + std::size_t(i) * d;
        const double* vi = tv + std::size_t(i) * d;
        auto term = [&](std::size_t j, double* out) {
            const double* yj = ry + j * d;
            const double* wj = rv + j * d;
            double r2 = 0.0, s2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double dx = xi[k] - yj[k];
                r2 += dx * dx;
                double dv = wj[k] - vi[k];
                s2 += dv * dv;
                out[k] = dv;
            }
            double mm = rw[j] * kern(std::sqrt(r2)) * al.mag_from_sq(s2);
            for (int k = 0; k < d; ++k) out[k] *= mm;
        };
        pairwise_sum(0, std::size_t(m), d, term, acc + std::size_t(i) * d);
    }
}

struct FlatState {
    std::vector<double> x, v;
};

} // namespace

PocResult poc_experiment(const ModelParams& params, const PocOpts& opts) {
    if (opts.n_list.empty()) throw ParameterError("poc_experiment: empty n_list");
    const int d = params.dim;
    KernelEval kern(params.kernel);
    AlignEval al(params.align);

    // coupling grid nodes
    std::vector<double> nodes{0.0};
    while (nodes.back() < opts.t_end) {
        double t = nodes.back();
        double h = opts.grid_dt0 * (opts.grid_growth ? std::max(1.0, t) : 1.0);
        h = std::min(h, opts.grid_dt_max);
        nodes.push_back(std::min(t + h, opts.t_end));
    }
    const int intervals = int(nodes.size()) - 1;

    // self-consistent reference, stored at nodes and interval midpoints
    InitialSpec ref_init = opts.init;
    ref_init.seed = substream(opts.seed, 1);
    AgentEnsemble ref = sample_ensemble(ref_init, opts.m_reference, d);
    std::vector<FlatState> ref_states(2 * intervals + 1);
    {
        auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& dydt) {
            const std::size_t nd = std::size_t(ref.n) * d;
            dydt.resize(2 * nd);
            for (std::size_t i = 0; i < nd; ++i) dydt[i] = y[nd + i];
            cross_force(y.data(), y.data() + nd, ref.n, y.data(), y.data() + nd,
                        ref.weights.data(), ref.n, d, kern, al, dydt.data() + nd);
        };
        AdaptiveOpts o;
        o.rtol = opts.ref_rtol;
        o.atol = opts.ref_atol;
        o.dt_init = std::min(1e-3, opts.t_end);
        Dopri5<decltype(rhs)&> solver(rhs, o);
        std::vector<double> y(ref.positions);
        y.insert(y.end(), ref.velocities.begin(), ref.velocities.end());
        const std::size_t nd = std::size_t(ref.n) * d;
        double t = 0.0;
        auto store = [&](int slot) {
            ref_states[slot].x.assign(y.begin(), y.begin() + nd);
            ref_states[slot].v.assign(y.begin() + nd, y.end());
        };
        store(0);
        for (int j = 0; j < intervals; ++j) {
            double mid = 0.5 * (nodes[j] + nodes[j + 1]);
            solver.integrate(t, y, mid, [](double, const std::vector<double>&) {});
            store(2 * j + 1);
            solver.integrate(t, y, nodes[j + 1], [](double, const std::vector<double>&) {});
            store(2 * j + 2);
        }
    }

    // sample times snapped to nodes
    std::vector<double> wanted = opts.sample_times.empty()
                                     ? std::vector<double>{opts.t_end}
                                     : opts.sample_times;
    std::vector<int> sample_nodes{0};
    for (double tq : wanted) {
        int best = 0;
        for (int j = 0; j <= intervals; ++j)
            if (std::fabs(nodes[j] - tq) < std::fabs(nodes[best] - tq)) best = j;
        if (best > sample_nodes.back()) sample_nodes.push_back(best);
    }
    int fit_node = 0;
    for (int j = 0; j <= intervals; ++j)
        if (std::fabs(nodes[j] - opts.fit_time) < std::fabs(nodes[fit_node] - opts.fit_time))
            fit_node = j;

    PocResult res;
    res.k = opts.k;
    res.fit_time = nodes[fit_node];
    for (int sn : sample_nodes) res.times.push_back(nodes[sn]);

    const double* rw = ref.weights.data();
    std::vector<double> acc, k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v, tx, tv;

    for (int n : opts.n_list) {
        PocPerN per;
        per.n = n;
        per.P.assign(sample_nodes.size(), 0.0);
        per.K.assign(sample_nodes.size(), 0.0);
        per.se_P.assign(sample_nodes.size(), 0.0);
        per.se_K.assign(sample_nodes.size(), 0.0);
        std::vector<std::vector<double>> repP(opts.replicas,
                                              std::vector<double>(sample_nodes.size(), 0.0)),
            repK(opts.replicas, std::vector<double>(sample_nodes.size(), 0.0));

        for (int r = 0; r < opts.replicas; ++r) {
            InitialSpec init = opts.init;
            init.seed = substream(opts.seed, 1000 + std::uint64_t(n), std::uint64_t(r));
            AgentEnsemble sys = sample_ensemble(init, n, d);
            AgentEnsemble chr = sys;
            const std::size_t nd = std::size_t(n) * d;
            acc.resize(nd);
            k1x.resize(nd); k1v.resize(nd); k2x.resize(nd); k2v.resize(nd);
            k3x.resize(nd); k3v.resize(nd); k4x.resize(nd); k4v.resize(nd);
            tx.resize(nd); tv.resize(nd);

            auto sys_force = [&](const double* X, const double* V, double* out) {
                cross_force(X, V, n, X, V, sys.weights.data(), n, d, kern, al, out);
            };
            auto chr_force = [&](const double* X, const double* V, const FlatState& rs, double* out) {
                cross_force(X, V, n, rs.x.data(), rs.v.data(), rw, ref.n, d, kern, al, out);
            };

            auto rk4_self = [&](AgentEnsemble& e, double h) {
                double* X = e.positions.data();
                double* V = e.velocities.data();
                sys_force(X, V, k1v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k1x[i] = V[i];
                    tx[i] = X[i] + 0.5 * h * k1x[i];
                    tv[i] = V[i] + 0.5 * h * k1v[i];
                }
                sys_force(tx.data(), tv.data(), k2v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k2x[i] = tv[i];
                    tx[i] = X[i] + 0.5 * h * k2x[i];
                    tv[i] = V[i] + 0.5 * h * k2v[i];
                }
                sys_force(tx.data(), tv.data(), k3v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k3x[i] = tv[i];
                    tx[i] = X[i] + h * k3x[i];
                    tv[i] = V[i] + h * k3v[i];
                }
                sys_force(tx.data(), tv.data(), k4v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k4x[i] = tv[i];
                    X[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
                    V[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
                }
            };
            auto rk4_chr = [&](AgentEnsemble& e, double h, int j) {
                const FlatState& r0 = ref_states[2 * j];
                const FlatState& rm = ref_states[2 * j + 1];
                const FlatState& r1 = ref_states[2 * j + 2];
                double* X = e.positions.data();
                double* V = e.velocities.data();
                chr_force(X, V, r0, k1v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k1x[i] = V[i];
                    tx[i] = X[i] + 0.5 * h * k1x[i];
                    tv[i] = V[i] + 0.5 * h * k1v[i];
                }
                chr_force(tx.data(), tv.data(), rm, k2v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k2x[i] = tv[i];
                    tx[i] = X[i] + 0.5 * h * k2x[i];
                    tv[i] = V[i] + 0.5 * h * k2v[i];
                }
                chr_force(tx.data(), tv.data(), rm, k3v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k3x[i] = tv[i];
                    tx[i] = X[i] + h * k3x[i];
                    tv[i] = V[i] + h * k3v[i];
                }
                chr_force(tx.data(), tv.data(), r1, k4v.data());
                for (std::size_t i = 0; i < nd; ++i) {
                    k4x[i] = tv[i];
                    X[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
                    V[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
                }
            };

            std::size_t next_s = 0;
            auto take_sample = [&](int node) {
                while (next_s < sample_nodes.size() && sample_nodes[next_s] == node) {
                    double P = 0.0, K = 0.0;
                    for (std::size_t i = 0; i < nd; ++i) {
                        double dx = sys.positions[i] - chr.positions[i];
                        double dv = sys.velocities[i] - chr.velocities[i];
                        P += dx * dx;
                        K += dv * dv;
                    }
                    repP[r][next_s] = 0.5 * P;
                    repK[r][next_s] = 0.5 * K;
                    ++next_s;
                }
            };
            take_sample(0);
            for (int j = 0; j < intervals; ++j) {
                double h = nodes[j + 1] - nodes[j];
                rk4_self(sys, h);
                rk4_chr(chr, h, j);
                take_sample(j + 1);
                if (opts.store_marginals && j + 1 == fit_node) {
                    std::vector<double> rowS, rowM;
                    for (int i = 0; i < std::min(opts.k, n); ++i) {
                        for (int kk = 0; kk < d; ++kk) rowS.push_back(sys.x(i)[kk]);
                        for (int kk = 0; kk < d; ++kk) rowS.push_back(sys.v(i)[kk]);
                        for (int kk = 0; kk < d; ++kk) rowM.push_back(chr.x(i)[kk]);
                        for (int kk = 0; kk < d; ++kk) rowM.push_back(chr.v(i)[kk]);
                    }
                    per.marginal_system.push_back(std::move(rowS));
                    per.marginal_meanfield.push_back(std::move(rowM));
                }
            }
            if (opts.store_marginals && fit_node == 0) {
                std::vector<double> rowS, rowM;
                for (int i = 0; i < std::min(opts.k, n); ++i) {
                    for (int kk = 0; kk < d; ++kk) rowS.push_back(sys.x(i)[kk]);
                    for (int kk = 0; kk < d; ++kk) rowS.push_back(sys.v(i)[kk]);
                    for (int kk = 0; kk < d; ++kk) rowM.push_back(chr.x(i)[kk]);
                    for (int kk = 0; kk < d; ++kk) rowM.push_back(chr.v(i)[kk]);
                }
                per.marginal_system.push_back(std::move(rowS));
                per.marginal_meanfield.push_back(std::move(rowM));
            }
        }

        for (std::size_t s = 0; s < sample_nodes.size(); ++s) {
            double mP = 0.0, mK = 0.0, sqP = 0.0, sqK = 0.0;
            for (int r = 0; r < opts.replicas; ++r) {
                mP += repP[r][s];
                mK += repK[r][s];
                sqP += repP[r][s] * repP[r][s];
                sqK += repK[r][s] * repK[r][s];
            }
            int R = opts.replicas;
            per.P[s] = mP / R;
            per.K[s] = mK / R;
            if (R > 1) {
                per.se_P[s] = std::sqrt(std::max(0.0, (sqP - mP * mP / R) / (R - 1)) / R);
                per.se_K[s] = std::sqrt(std::max(0.0, (sqK - mK * mK / R) / (R - 1)) / R);
            }
            double v = double(opts.k) / n * 2.0 * (per.P[s] + per.K[s]);
            per.proxy.push_back(std::sqrt(std::max(0.0, v)));
            double dv = double(opts.k) / n * 2.0 * (per.se_P[s] + per.se_K[s]);
            per.se_proxy.push_back(per.proxy[s] > 0.0 ? 0.5 * dv / per.proxy[s] : 0.0);
        }
        res.per_n.push_back(std::move(per));
    }

    // scaling fit at fit_time
    {
        std::size_t s_idx = 0;
        for (std::size_t s = 0; s < sample_nodes.size(); ++s)
            if (sample_nodes[s] == fit_node) s_idx = s;
        std::vector<double> xs, ys;
        for (const auto& per : res.per_n)
            if (per.proxy[s_idx] > 0.0) {
                xs.push_back(double(per.n));
                ys.push_back(per.proxy[s_idx]);
            }
        if (xs.size() >= 2) res.slope = fit_loglog(xs, ys);
    }
    return res;
}

// ------------------------------------------------------- kinetic rates --

KineticRateReport kinetic_diameter_experiment(const AgentEnsemble& init, const ModelParams& params,
                                              double t_end, const SimOptions& opt, double fit_lo,
                                              double fit_hi, double tolerance) {
    KineticRateReport rep;
    double p = params.align.p, alpha = params.kernel.alpha;
    if (p < 3.0)
        rep.regime = StabilityRegime::fat_p_lt3;
    else if (p == 3.0)
        rep.regime = StabilityRegime::fat_p_eq3;
    else
        rep.regime = StabilityRegime::fat_p_gt3;
    rep.tolerance = tolerance;

    TrajectoryRecord tr = characteristics_flow(init, params, t_end, opt);
    std::vector<double> ts, Vs, Ds;
    for (const auto& dd : tr.diameters) {
        ts.push_back(dd.t);
        Vs.push_back(dd.V);
        Ds.push_back(dd.D);
    }
    if (p == 3.0) {
        rep.compensated = true;
        double theta = alpha / (1.0 - alpha);
        rep.v_fit = fit_log_corrected(ts, Vs, theta, fit_lo, fit_hi);
        rep.theory_exponent = 0.0;
        rep.pass = std::fabs(rep.v_fit.exponent) < tolerance;
    } else {
        rep.theory_exponent = p < 3.0 ? -1.0 / (p - 2.0) : -(1.0 - alpha) / (p - alpha - 2.0);
        rep.v_fit = fit_power_law(ts, Vs, fit_lo, fit_hi);
        rep.pass = std::fabs(rep.v_fit.exponent - rep.theory_exponent) <=
                   tolerance * std::fabs(rep.theory_exponent);
    }
    bool d_ok = true;
    for (double dd : Ds)
        if (!(dd > 0.0)) d_ok = false;
    if (d_ok) rep.d_fit = fit_power_law(ts, Ds, fit_lo, fit_hi);
    return rep;
}

} // namespace flock
