#include "flock/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "flock/rng.hpp"

namespace flock {

PointCloud PointCloud::from_rows(int n, int dim, std::vector<double> pts) {
    PointCloud c;
    c.n = n;
    c.dim = dim;
    c.points = std::move(pts);
    c.weights.assign(n, 1.0 / n);
    c.validate();
    return c;
}

void PointCloud::validate() const {
    if (n < 1 || dim < 1) throw ParameterError("point cloud must be nonempty");
    if (points.size() != std::size_t(n) * dim) throw ParameterError("point cloud shape mismatch");
    if (weights.size() != std::size_t(n)) throw ParameterError("point cloud weights mismatch");
    double s = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw ParameterError("point cloud weights must be nonnegative");
        s += w;
    }
    if (std::fabs(s - 1.0) > 1e-12) throw ParameterError("point cloud weights must sum to 1");
}

PointCloud phase_cloud(const AgentEnsemble& ens) {
    PointCloud c;
    c.n = ens.n;
    c.dim = 2 * ens.dim;
    c.points.resize(std::size_t(ens.n) * c.dim);
    for (int i = 0; i < ens.n; ++i) {
        for (int k = 0; k < ens.dim; ++k) {
            c.points[std::size_t(i) * c.dim + k] = ens.x(i)[k];
            c.points[std::size_t(i) * c.dim + ens.dim + k] = ens.v(i)[k];
        }
    }
    c.weights = ens.weights;
    return c;
}

double min_cost_transport(const std::vector<double>& cost, int n, int m,
                          const std::vector<double>& a, const std::vector<double>& b) {
    // nodes 0..n-1 sources, n..n+m-1 sinks; reduced cost of an edge x->y is
    // c(x,y) + pi[x] - pi[y], kept nonnegative by the standard potential
    // update pi += min(dist, dist[target]) after each Dijkstra pass
    const int nm = n + m;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> rem_a = a, rem_b = b;
    std::vector<double> pi(nm, 0.0);
    // flow stored per sink as (source, amount) pairs
    std::vector<std::vector<std::pair<int, double>>> flow(m);

    std::vector<double> dist(nm);
    std::vector<int> prev(nm);
    std::vector<char> done(nm);

    double total = 0.0;
    double supply_left = 1.0;
    long guard = 64L * nm + 16;
    while (supply_left > 1e-15 && guard-- > 0) {
        std::fill(dist.begin(), dist.end(), inf);
        std::fill(prev.begin(), prev.end(), -1);
        std::fill(done.begin(), done.end(), 0);
        for (int i = 0; i < n; ++i)
            if (rem_a[i] > 1e-15) dist[i] = 0.0;
        int target = -1;
        while (true) {
            int u = -1;
            double best = inf;
            for (int x = 0; x < nm; ++x)
                if (!done[x] && dist[x] < best) {
                    best = dist[x];
                    u = x;
                }
            if (u < 0) break;
            done[u] = 1;
            if (u >= n && rem_b[u - n] > 1e-15) {
                target = u;
                break;
            }
            if (u < n) {
                const double* row = cost.data() + std::size_t(u) * m;
                for (int j = 0; j < m; ++j) {
                    int v = n + j;
                    if (done[v]) continue;
                    double rc = row[j] + pi[u] - pi[v];
                    if (rc < 0.0) rc = 0.0; // fp slack
                    if (dist[u] + rc < dist[v]) {
                        dist[v] = dist[u] + rc;
                        prev[v] = u;
                    }
                }
            } else {
                int j = u - n;
                for (auto& [i, f] : flow[j]) {
                    if (done[i] || f <= 1e-18) continue;
                    double rc = -cost[std::size_t(i) * m + j] + pi[u] - pi[i];
                    if (rc < 0.0) rc = 0.0; // tight on flow edges up to fp noise
                    if (dist[u] + rc < dist[i]) {
                        dist[i] = dist[u] + rc;
                        prev[i] = u;
                    }
                }
            }
        }
        if (target < 0) break; // nothing reachable (should not happen)
        double dT = dist[target];
        for (int x = 0; x < nm; ++x) pi[x] += std::min(dist[x], dT);
        // trace path, find bottleneck
        double bottleneck = rem_b[target - n];
        int x = target;
        while (prev[x] != -1) {
            int p = prev[x];
            if (x >= n && p < n) {
                // forward edge p->x, infinite capacity
            } else if (x < n && p >= n) {
                // backward edge: limited by flow on (x, p-n)
                for (auto& [i, f] : flow[p - n])
                    if (i == x) bottleneck = std::min(bottleneck, f);
            }
            x = p;
        }
        bottleneck = std::min(bottleneck, rem_a[x]);
        // augment
        int src_root = x;
        x = target;
        while (prev[x] != -1) {
            int p = prev[x];
            if (x >= n && p < n) {
                int j = x - n;
                bool found = false;
                for (auto& [i, f] : flow[j])
                    if (i == p) {
                        f += bottleneck;
                        found = true;
                        break;
                    }
                if (!found) flow[j].push_back({p, bottleneck});
            } else if (x < n && p >= n) {
                int j = p - n;
                for (auto& [i, f] : flow[j])
                    if (i == x) {
                        f -= bottleneck;
                        break;
                    }
            }
            x = p;
        }
        rem_a[src_root] -= bottleneck;
        rem_b[target - n] -= bottleneck;
        supply_left -= bottleneck;
    }
    for (int j = 0; j < m; ++j)
        for (auto& [i, f] : flow[j]) total += f * cost[std::size_t(i) * m + j];
    return total;
}

namespace {

enum class CostKind { euclid, sq_euclid };

double transport_cost(const PointCloud& a, const PointCloud& b, CostKind kind) {
    a.validate();
    b.validate();
    if (a.dim != b.dim) throw ParameterError("wasserstein: dimension mismatch");
    const int n = a.n, m = b.n, d = a.dim;
    std::vector<double> cost(std::size_t(n) * m);
    for (int i = 0; i < n; ++i) {
        const double* pi = a.p(i);
        for (int j = 0; j < m; ++j) {
            const double* pj = b.p(j);
            double s = 0.0;
            for (int k = 0; k < d; ++k) {
                double dd = pi[k] - pj[k];
                s += dd * dd;
            }
            cost[std::size_t(i) * m + j] = kind == CostKind::euclid ? std::sqrt(s) : s;
        }
    }
    return min_cost_transport(cost, n, m, a.weights, b.weights);
}

} // namespace

double wasserstein1(const PointCloud& a, const PointCloud& b) {
    return transport_cost(a, b, CostKind::euclid);
}

double wasserstein2(const PointCloud& a, const PointCloud& b) {
    double c = transport_cost(a, b, CostKind::sq_euclid);
    return std::sqrt(std::max(c, 0.0));
}

double sliced_wasserstein2(const PointCloud& a, const PointCloud& b, int projections,
                           std::uint64_t seed) {
    a.validate();
    b.validate();
    if (a.dim != b.dim) throw ParameterError("sliced_wasserstein2: dimension mismatch");
    if (projections < 1) throw ParameterError("sliced_wasserstein2: projections must be >= 1");
    const int d = a.dim;
    Rng rng(seed);
    std::vector<double> dir(d);
    std::vector<std::pair<double, double>> pa(a.n), pb(b.n); // (value, weight)
    double acc = 0.0;
    for (int q = 0; q < projections; ++q) {
        double n2 = 0.0;
        for (int k = 0; k < d; ++k) {
            dir[k] = rng.normal();
            n2 += dir[k] * dir[k];
        }
        double inv = 1.0 / std::sqrt(n2);
        for (int k = 0; k < d; ++k) dir[k] *= inv;
        for (int i = 0; i < a.n; ++i) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += dir[k] * a.p(i)[k];
            pa[i] = {s, a.weights[i]};
        }
        for (int i = 0; i < b.n; ++i) {
            double s = 0.0;
            for (int k = 0; k < d; ++k) s += dir[k] * b.p(i)[k];
            pb[i] = {s, b.weights[i]};
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        // quantile coupling of the two 1-D measures
        std::size_t ia = 0, ib = 0;
        double ra = pa[0].second, rb = pb[0].second, c2 = 0.0;
        while (ia < pa.size() && ib < pb.size()) {
            double mlump = std::min(ra, rb);
            double diff = pa[ia].first - pb[ib].first;
            c2 += mlump * diff * diff;
            ra -= mlump;
            rb -= mlump;
            if (ra <= 1e-18 && ia + 1 < pa.size()) ra = pa[++ia].second;
            else if (ra <= 1e-18) ++ia;
            if (rb <= 1e-18 && ib + 1 < pb.size()) rb = pb[++ib].second;
            else if (rb <= 1e-18) ++ib;
        }
        acc += c2;
    }
    return std::sqrt(std::max(acc / projections, 0.0));
}

} // namespace flock
