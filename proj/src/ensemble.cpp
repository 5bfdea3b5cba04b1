#include "flock/ensemble.hpp"

#include <cmath>

namespace flock {

AgentEnsemble AgentEnsemble::zeros(int n, int dim) {
    AgentEnsemble e;
    e.n = n;
    e.dim = dim;
    e.positions.assign(std::size_t(n) * dim, 0.0);
    e.velocities.assign(std::size_t(n) * dim, 0.0);
    e.weights.assign(n, n > 0 ? 1.0 / n : 0.0);
    return e;
}

void AgentEnsemble::validate() const {
    if (n < 1 || dim < 1) throw ParameterError("ensemble needs n >= 1 and dim >= 1");
    if (positions.size() != std::size_t(n) * dim || velocities.size() != std::size_t(n) * dim)
        throw ParameterError("ensemble positions/velocities shape mismatch");
    if (weights.size() != std::size_t(n)) throw ParameterError("ensemble weights shape mismatch");
    double s = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ParameterError("ensemble weights must be nonnegative");
        s += w;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw ParameterError("ensemble weights must sum to 1");
}

static void sample_into(const InitialSpec& spec, AgentEnsemble& e, Rng& rng) {
    const int n = e.n, d = e.dim;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) e.x(i)[k] = rng.uniform(spec.box_lo, spec.box_hi);
    for (int i = 0; i < n; ++i) {
        if (spec.vkind == InitialSpec::VelocityKind::uniform_ball) {
            rng.unit_ball(d, e.v(i));
            for (int k = 0; k < d; ++k) e.v(i)[k] *= spec.vradius;
        } else {
            // Gaussian, redrawn until inside the truncation ball
            double n2;
            do {
                n2 = 0.0;
                for (int k = 0; k < d; ++k) {
                    e.v(i)[k] = spec.vsigma * rng.normal();
                    n2 += e.v(i)[k] * e.v(i)[k];
                }
            } while (n2 > spec.vradius * spec.vradius);
        }
    }
}

AgentEnsemble sample_ensemble(const InitialSpec& spec, int n, int dim) {
    AgentEnsemble e = AgentEnsemble::zeros(n, dim);
    Rng rng(spec.seed);
    sample_into(spec, e, rng);
    return e;
}

AgentEnsemble sample_weighted_ensemble(const InitialSpec& spec, int n, int dim) {
    AgentEnsemble e = AgentEnsemble::zeros(n, dim);
    Rng rng(spec.seed);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < dim; ++k) e.x(i)[k] = rng.uniform(spec.box_lo, spec.box_hi);
    // velocities uniform on the ball (proposal), weights ~ Gaussian density
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        rng.unit_ball(dim, e.v(i));
        double n2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            e.v(i)[k] *= spec.vradius;
            n2 += e.v(i)[k] * e.v(i)[k];
        }
        e.weights[i] = std::exp(-0.5 * n2 / (spec.vsigma * spec.vsigma));
        total += e.weights[i];
    }
    for (int i = 0; i < n; ++i) e.weights[i] /= total;
    // renormalize exactly
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += e.weights[i];
    for (int i = 0; i < n; ++i) e.weights[i] /= s;
    return e;
}

std::vector<double> momentum(const AgentEnsemble& ens) {
    std::vector<double> m(ens.dim, 0.0);
    for (int i = 0; i < ens.n; ++i)
        for (int k = 0; k < ens.dim; ++k) m[k] += ens.weights[i] * ens.v(i)[k];
    return m;
}

} // namespace flock
