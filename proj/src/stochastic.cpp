#include "flock/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "flock/reduction.hpp"

namespace flock {

double torus_wrap(double x, double period) {
    double y = std::fmod(x, period);
    if (y < 0.0) y += period;
    return y;
}

double torus_dist2(const double* a, const double* b, int dim, double period) {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) {
        double d = std::fabs(a[k] - b[k]);
        d = std::fmod(d, period);
        if (d > 0.5 * period) d = period - d;
        s += d * d;
    }
    return s;
}

void torus_canonicalize(AgentEnsemble& ens, double period) {
    for (double& x : ens.positions) x = torus_wrap(x, period);
}

StrengthVector strength(const AgentEnsemble& ens, double period, const KernelSpec& kernel) {
    ens.validate();
    const int n = ens.n, d = ens.dim;
    KernelEval kern(kernel);
    StrengthVector out;
    out.s.resize(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* xi = ens.x(i);
        out.s[i] = pairwise_sum1(0, std::size_t(n), [&](std::size_t j) {
            double r = std::sqrt(torus_dist2(xi, ens.x(int(j)), d, period));
            return ens.weights[j] * kern(r);
        });
    }
    return out;
}

void em_drift(const AgentEnsemble& ens, double period, const ModelParams& params, double* acc,
              double* strength_out) {
    const int n = ens.n, d = ens.dim;
    KernelEval kern(params.kernel);
    AlignEval al(params.align);
    const double* X = ens.positions.data();
    const double* V = ens.velocities.data();
    const double* W = ens.weights.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* xi = X + std::size_t(i) * d;
        const double* vi = V + std::size_t(i) * d;
        double buf[8];
        auto term = [&](std::size_t j, double* out) {
            const double* xj = X + j * d;
            const double* vj = V + j * d;
            double s2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double dv = vj[k] - vi[k];
                s2 += dv * dv;
                out[k] = dv;
            }
            double phi = W[j] * kern(std::sqrt(torus_dist2(xi, xj, d, period)));
            double m = phi * al.mag_from_sq(s2);
            for (int k = 0; k < d; ++k) out[k] *= m;
            out[d] = phi;
        };
        pairwise_sum(0, std::size_t(n), d + 1, term, buf);
        for (int k = 0; k < d; ++k) acc[std::size_t(i) * d + k] = buf[k];
        if (strength_out) strength_out[i] = buf[d];
    }
}

void mv_drift(const AgentEnsemble& tracked, const AgentEnsemble& reference, double period,
              const ModelParams& params, double* acc, double* strength_out) {
    if (reference.n < 1) throw ParameterError("mv_drift: empty reference ensemble");
    if (tracked.dim != reference.dim) throw ParameterError("mv_drift: dimension mismatch");
    const int n = tracked.n, d = tracked.dim, m = reference.n;
    KernelEval kern(params.kernel);
    AlignEval al(params.align);
    const double* Y = reference.positions.data();
    const double* Wv = reference.velocities.data();
    const double* Wt = reference.weights.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* xi = tracked.x(i);
        const double* vi = tracked.v(i);
        double buf[8];
        auto term = [&](std::size_t j, double* out) {
            const double* yj = Y + j * d;
            const double* wj = Wv + j * d;
            double s2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double dv = wj[k] - vi[k];
                s2 += dv * dv;
                out[k] = dv;
            }
            double phi = Wt[j] * kern(std::sqrt(torus_dist2(xi, yj, d, period)));
            double mm = phi * al.mag_from_sq(s2);
            for (int k = 0; k < d; ++k) out[k] *= mm;
            out[d] = phi;
        };
        pairwise_sum(0, std::size_t(m), d + 1, term, buf);
        for (int k = 0; k < d; ++k) acc[std::size_t(i) * d + k] = buf[k];
        if (strength_out) strength_out[i] = buf[d];
    }
}

namespace {

void em_update(AgentEnsemble& ens, double period, const ModelParams& params,
               const std::vector<double>& drift, const std::vector<double>& s,
               const NoisePath& path, std::uint64_t step_index, double dt) {
    const int n = ens.n, d = ens.dim;
    const double sdt = std::sqrt(dt);
    for (int i = 0; i < n; ++i) {
        double* x = ens.x(i);
        double* v = ens.v(i);
        double amp = std::sqrt(2.0 * std::max(0.0, noise_eval(params.noise, s[i])));
        for (int k = 0; k < d; ++k) {
            x[k] = torus_wrap(x[k] + v[k] * dt, period);
            v[k] += drift[std::size_t(i) * d + k] * dt +
                    amp * sdt * path.gaussian(step_index, std::uint64_t(i), std::uint64_t(k));
        }
    }
    for (double y : ens.velocities)
        if (!std::isfinite(y))
            throw IntegrationError("non-finite state in EM step", double(step_index) * dt);
}

} // namespace

void em_step(AgentEnsemble& ens, double period, const ModelParams& params, const NoisePath& path,
             std::uint64_t step_index, double dt) {
    if (!(dt > 0.0)) throw ParameterError("em_step: dt must be positive");
    ens.validate();
    std::vector<double> drift(std::size_t(ens.n) * ens.dim), s(ens.n);
    em_drift(ens, period, params, drift.data(), s.data());
    em_update(ens, period, params, drift, s, path, step_index, dt);
}

void mv_characteristics_step(AgentEnsemble& tracked, const AgentEnsemble& reference, double period,
                             const ModelParams& params, const NoisePath& path,
                             std::uint64_t step_index, double dt) {
    if (!(dt > 0.0)) throw ParameterError("mv_characteristics_step: dt must be positive");
    tracked.validate();
    std::vector<double> drift(std::size_t(tracked.n) * tracked.dim), s(tracked.n);
    mv_drift(tracked, reference, period, params, drift.data(), s.data());
    em_update(tracked, period, params, drift, s, path, step_index, dt);
}

std::vector<CouplingRun> coupled_run(const ModelParams& params, const StochCouplingOpts& opts) {
    if (params.domain.type != Domain::Type::torus)
        throw ParameterError("coupled_run: stochastic coupling runs on the torus");
    if (opts.n_list.empty()) throw ParameterError("coupled_run: empty n_list");
    const double L = params.domain.period;
    const int d = params.dim;

    // step grid
    int total_steps = opts.t_end > 0.0 ? std::max(1, int(std::llround(opts.t_end / opts.dt))) : 0;
    double dt = total_steps > 0 ? opts.t_end / total_steps : 0.0;
    int nsamp = opts.t_end > 0.0 ? std::max(1, opts.sample_count) : 0;
    std::vector<int> sample_steps;
    sample_steps.push_back(0);
    for (int q = 1; q <= nsamp; ++q) {
        int st = int(std::llround(double(q) / nsamp * total_steps));
        if (st > sample_steps.back()) sample_steps.push_back(st);
    }

    // shared reference
    InitialSpec ref_init = opts.init;
    ref_init.seed = substream(opts.seed, 1);
    AgentEnsemble ref = sample_ensemble(ref_init, opts.m_reference, d);
    torus_canonicalize(ref, L);
    NoisePath ref_path{substream(opts.seed, 2)};

    struct Pair {
        AgentEnsemble sys, chr;
        NoisePath path;
        double martingale = 0.0;
    };
    const int nN = int(opts.n_list.size());
    std::vector<std::vector<Pair>> pairs(nN);
    std::vector<CouplingRun> runs(nN);
    for (int q = 0; q < nN; ++q) {
        runs[q].params = params;
        runs[q].n = opts.n_list[q];
        runs[q].m_reference = opts.m_reference;
        runs[q].replica_count = opts.replicas;
        runs[q].seed = opts.seed;
        pairs[q].resize(opts.replicas);
        for (int r = 0; r < opts.replicas; ++r) {
            InitialSpec init = opts.init;
            init.seed = substream(opts.seed, 100 + std::uint64_t(q), std::uint64_t(r));
            Pair& p = pairs[q][r];
            p.sys = sample_ensemble(init, opts.n_list[q], d);
            torus_canonicalize(p.sys, L);
            p.chr = p.sys;
            p.path = NoisePath{substream(opts.seed, 200 + std::uint64_t(q), std::uint64_t(r))};
        }
    }

    double min_strength = 1.0;
    auto record_sample = [&](int sample_idx, double t) {
        for (int q = 0; q < nN; ++q) {
            CouplingRun& run = runs[q];
            if (int(run.times.size()) <= sample_idx) {
                run.times.push_back(t);
                run.E_x.push_back(0.0);
                run.E_v.push_back(0.0);
                run.E.push_back(0.0);
                run.se_E.push_back(0.0);
                if (opts.store_states) run.states.emplace_back();
            }
            double mean_E = 0.0, mean_Ex = 0.0, mean_Ev = 0.0, sq = 0.0;
            for (int r = 0; r < opts.replicas; ++r) {
                const Pair& p = pairs[q][r];
                double ex = 0.0, ev = 0.0;
                for (int i = 0; i < p.sys.n; ++i) {
                    ex += torus_dist2(p.sys.x(i), p.chr.x(i), d, L);
                    for (int k = 0; k < d; ++k) {
                        double dv = p.sys.v(i)[k] - p.chr.v(i)[k];
                        ev += dv * dv;
                    }
                }
                ex /= p.sys.n;
                ev /= p.sys.n;
                mean_Ex += ex;
                mean_Ev += ev;
                mean_E += ex + ev;
                sq += (ex + ev) * (ex + ev);
                if (opts.store_states) run.states[sample_idx].push_back(p.sys);
            }
            int R = opts.replicas;
            run.E_x[sample_idx] = mean_Ex / R;
            run.E_v[sample_idx] = mean_Ev / R;
            run.E[sample_idx] = mean_E / R;
            double var = R > 1 ? std::max(0.0, (sq - mean_E * mean_E / R) / (R - 1)) : 0.0;
            run.se_E[sample_idx] = R > 1 ? std::sqrt(var / R) : 0.0;
        }
        if (opts.store_states)
            for (int q = 0; q < nN; ++q) runs[q].reference_states.push_back(ref);
    };

    record_sample(0, 0.0);
    int next_sample = 1;

    std::vector<double> drift_s, s_s, drift_c, s_c, ref_drift, ref_s;
    for (int step = 0; step < total_steps; ++step) {
        // replicas advance from the reference state at the current time
        for (int q = 0; q < nN; ++q) {
            const int n = opts.n_list[q];
            drift_s.resize(std::size_t(n) * d);
            s_s.resize(n);
            drift_c.resize(std::size_t(n) * d);
            s_c.resize(n);
            for (int r = 0; r < opts.replicas; ++r) {
                Pair& p = pairs[q][r];
                em_drift(p.sys, L, params, drift_s.data(), s_s.data());
                mv_drift(p.chr, ref, L, params, drift_c.data(), s_c.data());
                const double sdt = std::sqrt(dt);
                for (int i = 0; i < n; ++i) {
                    double hs = noise_eval(params.noise, s_s[i]);
                    double hc = noise_eval(params.noise, std::max(0.0, s_c[i]));
                    min_strength = std::min(min_strength, std::min(s_s[i], s_c[i]));
                    double amp_s = std::sqrt(2.0 * std::max(0.0, hs));
                    double amp_c = std::sqrt(2.0 * std::max(0.0, hc));
                    double* xs = p.sys.x(i);
                    double* vs = p.sys.v(i);
                    double* xc = p.chr.x(i);
                    double* vc = p.chr.v(i);
                    for (int k = 0; k < d; ++k) {
                        double dW = sdt * p.path.gaussian(std::uint64_t(step), std::uint64_t(i),
                                                          std::uint64_t(k));
                        p.martingale += (vs[k] - vc[k]) * std::sqrt(2.0) * (amp_s / std::sqrt(2.0) -
                                        amp_c / std::sqrt(2.0)) * dW;
                        xs[k] = torus_wrap(xs[k] + vs[k] * dt, L);
                        xc[k] = torus_wrap(xc[k] + vc[k] * dt, L);
                        vs[k] += drift_s[std::size_t(i) * d + k] * dt + amp_s * dW;
                        vc[k] += drift_c[std::size_t(i) * d + k] * dt + amp_c * dW;
                    }
                }
                for (double y : p.sys.velocities)
                    if (!std::isfinite(y))
                        throw IntegrationError("non-finite state in coupled run", (step + 1) * dt);
            }
        }
        // reference advances with its own noise
        ref_drift.resize(std::size_t(ref.n) * d);
        ref_s.resize(ref.n);
        em_drift(ref, L, params, ref_drift.data(), ref_s.data());
        {
            const double sdt = std::sqrt(dt);
            for (int i = 0; i < ref.n; ++i) {
                double amp = std::sqrt(2.0 * std::max(0.0, noise_eval(params.noise, ref_s[i])));
                double* x = ref.x(i);
                double* v = ref.v(i);
                for (int k = 0; k < d; ++k) {
                    x[k] = torus_wrap(x[k] + v[k] * dt, L);
                    v[k] += ref_drift[std::size_t(i) * d + k] * dt +
                            amp * sdt * ref_path.gaussian(std::uint64_t(step), std::uint64_t(i),
                                                          std::uint64_t(k));
                }
            }
        }
        if (next_sample < int(sample_steps.size()) && step + 1 == sample_steps[next_sample]) {
            record_sample(next_sample, (step + 1) * dt);
            ++next_sample;
        }
    }

    // martingale statistics pooled over every replica of every N
    {
        double m = 0.0, sq = 0.0;
        int cnt = 0;
        for (auto& vec : pairs)
            for (auto& p : vec) {
                m += p.martingale;
                sq += p.martingale * p.martingale;
                ++cnt;
            }
        double mean = cnt ? m / cnt : 0.0;
        double var = cnt > 1 ? std::max(0.0, (sq - m * m / cnt) / (cnt - 1)) : 0.0;
        for (auto& run : runs) {
            run.martingale_mean = mean;
            run.martingale_se = cnt > 1 ? std::sqrt(var / cnt) : 0.0;
            run.min_strength_seen = min_strength;
        }
    }

    // empirical exponential-moment diagnostic on the reference at t_end
    {
        double pexp = params.align.p - 1.0;
        double best = 0.0;
        for (double c0 = 1.0 / 64.0; c0 <= 16.0; c0 *= 2.0) {
            double mean = 0.0;
            bool ok = true;
            for (int i = 0; i < ref.n && ok; ++i) {
                double n2 = 0.0;
                for (int k = 0; k < d; ++k) n2 += ref.v(i)[k] * ref.v(i)[k];
                double e = std::exp(c0 * std::pow(n2, 0.5 * pexp));
                if (!std::isfinite(e) || e > 1e250) ok = false;
                mean += e;
            }
            if (!ok || mean / ref.n > 1e8) break;
            best = c0;
        }
        for (auto& run : runs) run.exp_moment_c0 = best;
    }
    return runs;
}

namespace {
double obs_one(const double*, const double*, int) { return 1.0; }
double obs_x0(const double* x, const double*, int) { return x[0]; }
double obs_x1(const double* x, const double*, int d) { return d > 1 ? x[1] : 0.0; }
double obs_x2(const double* x, const double*, int d) { return d > 2 ? x[2] : 0.0; }
double obs_v0(const double*, const double* v, int) { return v[0]; }
double obs_v1(const double*, const double* v, int d) { return d > 1 ? v[1] : 0.0; }
double obs_v2(const double*, const double* v, int d) { return d > 2 ? v[2] : 0.0; }
double obs_bump(const double*, const double* v, int d) {
    double n2 = 0.0;
    for (int k = 0; k < d; ++k) n2 += v[k] * v[k];
    return std::exp(-n2);
}
} // namespace

Observable make_observable(const std::string& id, int dim) {
    Observable o;
    o.id = id;
    if (id == "one") {
        o.fn = obs_one;
        o.lipschitz = 0.0;
    } else if (id == "x0") {
        o.fn = obs_x0;
    } else if (id == "x1" && dim > 1) {
        o.fn = obs_x1;
    } else if (id == "x2" && dim > 2) {
        o.fn = obs_x2;
    } else if (id == "v0") {
        o.fn = obs_v0;
    } else if (id == "v1" && dim > 1) {
        o.fn = obs_v1;
    } else if (id == "v2" && dim > 2) {
        o.fn = obs_v2;
    } else if (id == "bump") {
        o.fn = obs_bump;
        o.lipschitz = std::sqrt(2.0 / std::exp(1.0));
    } else {
        throw ParameterError("unknown observable id: " + id);
    }
    return o;
}

std::vector<double> observable_error(const CouplingRun& run, const std::string& id) {
    if (run.states.empty() || run.reference_states.empty())
        throw ParameterError("observable_error: run was not recorded with store_states");
    Observable obs = make_observable(id, run.params.dim);
    std::vector<double> out;
    for (std::size_t s = 0; s < run.states.size(); ++s) {
        const AgentEnsemble& ref = run.reference_states[s];
        double ref_mean = 0.0;
        for (int i = 0; i < ref.n; ++i)
            ref_mean += ref.weights[i] * obs.fn(ref.x(i), ref.v(i), ref.dim);
        double acc = 0.0;
        for (const AgentEnsemble& sys : run.states[s]) {
            double m = 0.0;
            for (int i = 0; i < sys.n; ++i)
                m += sys.weights[i] * obs.fn(sys.x(i), sys.v(i), sys.dim);
            double gap = m - ref_mean;
            acc += gap * gap;
        }
        out.push_back(run.states[s].empty() ? 0.0 : acc / double(run.states[s].size()));
    }
    return out;
}

} // namespace flock
