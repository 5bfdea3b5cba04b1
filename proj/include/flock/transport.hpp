#pragma once

#include <cstdint>
#include <vector>

#include "flock/ensemble.hpp"
#include "flock/errors.hpp"

namespace flock {

// Weighted empirical measure: n points in R^dim with weights summing to 1.
struct PointCloud {
    int n = 0;
    int dim = 0;
    std::vector<double> points;  // n*dim
    std::vector<double> weights; // n

    const double* p(int i) const { return points.data() + std::size_t(i) * dim; }
    static PointCloud from_rows(int n, int dim, std::vector<double> pts);
    void validate() const;
};

// Phase-space cloud (x,v) in R^{2d} of an ensemble, weights carried over.
PointCloud phase_cloud(const AgentEnsemble& ens);

// Exact optimal transport cost between weighted clouds via successive
// shortest paths on the dense bipartite graph. `cost(i,j)` entries must be
// nonnegative.
double min_cost_transport(const std::vector<double>& cost, int n, int m,
                          const std::vector<double>& a, const std::vector<double>& b);

double wasserstein1(const PointCloud& a, const PointCloud& b);
double wasserstein2(const PointCloud& a, const PointCloud& b);

// Monte Carlo sliced W2: average of 1-D W2^2 over random unit directions.
// Diagnostic surrogate for large clouds; never used where exactness matters.
double sliced_wasserstein2(const PointCloud& a, const PointCloud& b, int projections,
                           std::uint64_t seed);

} // namespace flock
