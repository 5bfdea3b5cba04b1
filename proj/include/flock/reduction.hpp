#pragma once

#include <cstddef>

namespace flock {

// Pairwise (tree) reduction over an index range. Fixed association order, so
// the result is independent of thread layout and identical run to run.
// Term must write `dim` doubles for index j into its output pointer.
template <class Term>
inline void pairwise_sum(std::size_t lo, std::size_t hi, int dim, const Term& term,
                         double* acc) {
    constexpr std::size_t kLeaf = 16;
    if (hi - lo <= kLeaf) {
        double buf[8];
        for (int k = 0; k < dim; ++k) acc[k] = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
            term(j, buf);
            for (int k = 0; k < dim; ++k) acc[k] += buf[k];
        }
        return;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    double left[8], right[8];
    pairwise_sum(lo, mid, dim, term, left);
    pairwise_sum(mid, hi, dim, term, right);
    for (int k = 0; k < dim; ++k) acc[k] = left[k] + right[k];
}

// Scalar variant.
template <class Term>
inline double pairwise_sum1(std::size_t lo, std::size_t hi, const Term& term) {
    constexpr std::size_t kLeaf = 16;
    if (hi - lo <= kLeaf) {
        double s = 0.0;
        for (std::size_t j = lo; j < hi; ++j) s += term(j);
        return s;
    }
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum1(lo, mid, term) + pairwise_sum1(mid, hi, term);
}

} // namespace flock
