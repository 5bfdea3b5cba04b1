#include "flock/dynamics.hpp"

#include <cmath>

#include "flock/ode.hpp"
#include "flock/reduction.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace flock {

void force_deterministic(const AgentEnsemble& ens, const KernelSpec& kernel,
                         const AlignmentSpec& align, double* acc) {
    ens.validate();
    const int n = ens.n, d = ens.dim;
    KernelEval kern(kernel);
    AlignEval al(align);
    const double* X = ens.positions.data();
    const double* V = ens.velocities.data();
    const double* W = ens.weights.data();

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const double* xi = X + std::size_t(i) * d;
        const double* vi = V + std::size_t(i) * d;
        auto term = [&](std::size_t j, double* out) {
            const double* xj = X + j * d;
            const double* vj = V + j * d;
            double r2 = 0.0, s2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double dx = xi[k] - xj[k];
                r2 += dx * dx;
                double dv = vj[k] - vi[k];
                s2 += dv * dv;
                out[k] = dv;
            }
            double m = W[j] * kern(std::sqrt(r2)) * al.mag_from_sq(s2);
            for (int k = 0; k < d; ++k) out[k] *= m;
        };
        pairwise_sum(0, std::size_t(n), d, term, acc + std::size_t(i) * d);
    }
}

std::vector<double> force_deterministic(const AgentEnsemble& ens, const KernelSpec& kernel,
                                        const AlignmentSpec& align) {
    std::vector<double> acc(std::size_t(ens.n) * ens.dim);
    force_deterministic(ens, kernel, align, acc.data());
    return acc;
}

DiameterStats diameters(const AgentEnsemble& ens) {
    const int n = ens.n, d = ens.dim;
    double D2 = 0.0, V2 = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double dx2 = 0.0, dv2 = 0.0;
            for (int k = 0; k < d; ++k) {
                double dx = ens.x(i)[k] - ens.x(j)[k];
                double dv = ens.v(i)[k] - ens.v(j)[k];
                dx2 += dx * dx;
                dv2 += dv * dv;
            }
            if (dx2 > D2) D2 = dx2;
            if (dv2 > V2) V2 = dv2;
        }
    DiameterStats s;
    s.D = std::sqrt(D2);
    s.V = std::sqrt(V2);
    return s;
}

namespace {

struct FlockRhs {
    const KernelSpec* kernel;
    const AlignmentSpec* align;
    int n, d;
    mutable AgentEnsemble scratch;

    void operator()(double, const std::vector<double>& y, std::vector<double>& dydt) const {
        const std::size_t nd = std::size_t(n) * d;
        dydt.resize(2 * nd);
        // dx/dt = v
        for (std::size_t i = 0; i < nd; ++i) dydt[i] = y[nd + i];
        scratch.positions.assign(y.begin(), y.begin() + nd);
        scratch.velocities.assign(y.begin() + nd, y.end());
        force_deterministic(scratch, *kernel, *align, dydt.data() + nd);
    }
};

std::vector<double> pack(const AgentEnsemble& e) {
    std::vector<double> y;
    y.reserve(2 * e.positions.size());
    y.insert(y.end(), e.positions.begin(), e.positions.end());
    y.insert(y.end(), e.velocities.begin(), e.velocities.end());
    return y;
}

void unpack(const std::vector<double>& y, AgentEnsemble& e) {
    const std::size_t nd = e.positions.size();
    std::copy(y.begin(), y.begin() + nd, e.positions.begin());
    std::copy(y.begin() + nd, y.end(), e.velocities.begin());
}

bool all_finite(const std::vector<double>& y) {
    for (double v : y)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace

StepResult step(const AgentEnsemble& ens, const KernelSpec& kernel, const AlignmentSpec& align,
                double dt, Scheme scheme, double rtol, double atol) {
    if (!(dt > 0.0)) throw ParameterError("step: dt must be positive");
    ens.validate();
    FlockRhs rhs{&kernel, &align, ens.n, ens.dim, AgentEnsemble::zeros(ens.n, ens.dim)};
    rhs.scratch.weights = ens.weights;
    std::vector<double> y = pack(ens);

    StepResult out;
    out.ensemble = ens;
    double t = 0.0;
    if (scheme == Scheme::euler) {
        std::vector<double> k1;
        euler_step(rhs, t, y, dt, k1);
        out.dt_taken = dt;
    } else if (scheme == Scheme::rk4) {
        std::vector<std::vector<double>> work;
        rk4_step(rhs, t, y, dt, work);
        out.dt_taken = dt;
    } else {
        AdaptiveOpts o;
        o.rtol = rtol;
        o.atol = atol;
        o.dt_init = dt;
        Dopri5<FlockRhs&> solver(rhs, o);
        double trial = dt;
        bool ok = false;
        double err = 0.0;
        for (int tries = 0; tries < 64 && !ok; ++tries) {
            double next = solver.attempt(t, y, trial, ok, err);
            if (!ok) trial = next;
        }
        if (!ok) throw IntegrationError("adaptive step failed to converge", 0.0);
        out.dt_taken = t;
        out.error_estimate = err;
    }
    if (!all_finite(y)) throw IntegrationError("non-finite state after step", out.dt_taken);
    unpack(y, out.ensemble);
    return out;
}

std::vector<double> make_sample_times(double t_end, const SimOptions& opt) {
    std::vector<double> ts;
    int m = std::max(2, opt.samples);
    ts.reserve(m + 1);
    if (opt.log_spacing) {
        ts.push_back(0.0);
        double t0 = std::min(opt.t_first, t_end);
        double ratio = std::pow(t_end / t0, 1.0 / double(m - 1));
        double t = t0;
        for (int k = 0; k < m; ++k) {
            ts.push_back(std::min(t, t_end));
            t *= ratio;
        }
        ts.back() = t_end;
    } else {
        for (int k = 0; k <= m; ++k) ts.push_back(t_end * double(k) / double(m));
    }
    return ts;
}

TrajectoryRecord simulate(const AgentEnsemble& init, const ModelParams& params, double t_end,
                          const SimOptions& opt) {
    if (!(t_end > 0.0)) throw ParameterError("simulate: t_end must be positive");
    init.validate();
    if (init.dim != params.dim) throw ParameterError("simulate: ensemble/params dimension mismatch");

    TrajectoryRecord rec;
    rec.params = params;
    std::vector<double> times = make_sample_times(t_end, opt);

    AgentEnsemble cur = init;
    FlockRhs rhs{&params.kernel, &params.align, cur.n, cur.dim, AgentEnsemble::zeros(cur.n, cur.dim)};
    rhs.scratch.weights = cur.weights;
    std::vector<double> y = pack(cur);

    AdaptiveOpts o;
    o.rtol = opt.rtol;
    o.atol = opt.atol;
    o.dt_init = opt.scheme == Scheme::adaptive_rk45 ? std::min(1e-3, t_end) : opt.dt;
    Dopri5<FlockRhs&> solver(rhs, o);

    std::vector<std::vector<double>> work;
    std::vector<double> k1;
    bool frozen = false;

    double t = 0.0;
    auto record = [&](double tt) {
        unpack(y, cur);
        DiameterStats ds = diameters(cur);
        ds.t = tt;
        rec.times.push_back(tt);
        rec.diameters.push_back(ds);
        if (opt.store_snapshots) rec.snapshots.push_back(cur);
        if (!frozen && ds.V < opt.freeze_velocity_below) frozen = true;
        return ds;
    };
    record(0.0);

    const std::size_t nd = std::size_t(cur.n) * cur.dim;
    for (std::size_t s = 1; s < times.size(); ++s) {
        double t1 = times[s];
        if (t1 <= t) continue;
        if (frozen) {
            // aligned: straight-line transport
            double h = t1 - t;
            for (std::size_t i = 0; i < nd; ++i) y[i] += h * y[nd + i];
            t = t1;
        } else if (opt.scheme == Scheme::adaptive_rk45) {
            solver.integrate(t, y, t1, [](double, const std::vector<double>&) {});
        } else {
            double remaining = t1 - t;
            int nsub = std::max(1, int(std::ceil(remaining / opt.dt - 1e-12)));
            double h = remaining / nsub;
            for (int q = 0; q < nsub; ++q) {
                if (opt.scheme == Scheme::rk4)
                    rk4_step(rhs, t, y, h, work);
                else
                    euler_step(rhs, t, y, h, k1);
                t += h;
            }
            t = t1;
            solver.reset();
        }
        if (!all_finite(y)) throw IntegrationError("non-finite state", t);
        record(t1);
    }
    return rec;
}

double two_particle_speed(double w0, double p, double t) {
    if (p == 2.0) return w0 * std::exp(-t);
    return std::pow(std::pow(w0, 2.0 - p) + (p - 2.0) * t, -1.0 / (p - 2.0));
}

} // namespace flock
