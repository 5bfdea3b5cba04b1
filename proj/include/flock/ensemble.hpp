#pragma once

#include <cstdint>
#include <vector>

#include "flock/errors.hpp"
#include "flock/kernels.hpp"
#include "flock/rng.hpp"

namespace flock {

struct Domain {
    enum class Type { free_space, torus };
    Type type = Type::free_space;
    double period = 1.0; // torus period per axis
};

struct ModelParams {
    AlignmentSpec align;
    KernelSpec kernel;
    NoiseSpec noise;
    int dim = 2;
    Domain domain;
};

// Positions/velocities of n agents in R^d plus quadrature weights. Uniform
// weights 1/n give the particle system; general weights carry a weighted
// characteristic ensemble.
struct AgentEnsemble {
    int dim = 0;
    int n = 0;
    std::vector<double> positions;  // n*dim, row-major
    std::vector<double> velocities; // n*dim
    std::vector<double> weights;    // n, nonnegative, sums to 1

    double* x(int i) { return positions.data() + std::size_t(i) * dim; }
    const double* x(int i) const { return positions.data() + std::size_t(i) * dim; }
    double* v(int i) { return velocities.data() + std::size_t(i) * dim; }
    const double* v(int i) const { return velocities.data() + std::size_t(i) * dim; }

    static AgentEnsemble zeros(int n, int dim);
    void validate() const;
};

struct DiameterStats {
    double t = 0.0;
    double D = 0.0; // max pairwise position distance
    double V = 0.0; // max pairwise velocity distance
};

struct TrajectoryRecord {
    ModelParams params;
    std::vector<double> times;
    std::vector<DiameterStats> diameters;
    std::vector<AgentEnsemble> snapshots; // empty unless requested
    std::uint64_t seed = 0;
};

// Seeded initial-data sampler. Positions uniform on a box, velocities either
// uniform on a ball or Gaussian truncated to a ball (compact support either
// way).
struct InitialSpec {
    double box_lo = 0.0;
    double box_hi = 1.0;
    enum class VelocityKind { uniform_ball, gaussian_truncated } vkind = VelocityKind::uniform_ball;
    double vradius = 1.0;
    double vsigma = 0.5;
    std::uint64_t seed = 1;
};

AgentEnsemble sample_ensemble(const InitialSpec& spec, int n, int dim);

// Importance quadrature of a truncated-Gaussian velocity law: nodes drawn
// uniformly, weights proportional to the target density. Produces genuinely
// non-uniform weights for the weighted characteristic method.
AgentEnsemble sample_weighted_ensemble(const InitialSpec& spec, int n, int dim);

// total momentum sum_i w_i v_i
std::vector<double> momentum(const AgentEnsemble& ens);

} // namespace flock
