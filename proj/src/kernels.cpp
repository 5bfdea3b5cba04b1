#include "flock/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace flock {

KernelSpec KernelSpec::power(double alpha) {
    KernelSpec k;
    k.form = KernelForm::power_law;
    k.alpha = alpha;
    k.lambda = std::pow(2.0, -alpha);
    k.Lambda = 1.0;
    k.r0 = 1.0;
    k.validate();
    return k;
}

KernelSpec KernelSpec::table(std::vector<double> r, std::vector<double> phi) {
    KernelSpec k;
    k.form = KernelForm::custom_table;
    k.table_r = std::move(r);
    k.table_phi = std::move(phi);
    k.validate();
    return k;
}

void KernelSpec::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw ParameterError("kernel exponent alpha must lie in [0,1)");
    if (!(lambda > 0.0) || !(Lambda > 0.0) || !(r0 > 0.0))
        throw ParameterError("fat-tail constants lambda, Lambda, r0 must be positive");
    if (form == KernelForm::custom_table) {
        if (table_r.size() < 2 || table_r.size() != table_phi.size())
            throw ParameterError("custom_table kernel needs matching r/phi samples (>= 2)");
        if (table_r.front() != 0.0)
            throw ParameterError("custom_table kernel must start at r = 0");
        for (std::size_t i = 0; i < table_r.size(); ++i) {
            if (i > 0 && !(table_r[i] > table_r[i - 1]))
                throw ParameterError("custom_table radii must be strictly increasing");
            if (!(table_phi[i] >= 0.0))
                throw ParameterError("custom_table kernel values must be nonnegative");
            if (i > 0 && table_phi[i] > table_phi[i - 1] + 1e-15)
                throw ParameterError("custom_table kernel must be non-increasing");
        }
    }
}

double phi_eval(const KernelSpec& spec, double r) {
    if (!(r >= 0.0)) throw ParameterError("phi_eval: radius must be nonnegative");
    if (spec.form == KernelForm::power_law) {
        if (spec.alpha == 0.0) return 1.0;
        return std::pow(1.0 + r, -spec.alpha);
    }
    const auto& rs = spec.table_r;
    const auto& ps = spec.table_phi;
    if (r >= rs.back()) return ps.back();
    auto it = std::upper_bound(rs.begin(), rs.end(), r);
    std::size_t hi = std::size_t(it - rs.begin());
    std::size_t lo = hi - 1;
    double w = (r - rs[lo]) / (rs[hi] - rs[lo]);
    return ps[lo] + w * (ps[hi] - ps[lo]);
}

void alignment_eval(const AlignmentSpec& spec, const double* v, int dim, double* out) {
    AlignEval a(spec);
    double n2 = 0.0;
    for (int k = 0; k < dim; ++k) n2 += v[k] * v[k];
    double m = a.mag_from_sq(n2);
    for (int k = 0; k < dim; ++k) out[k] = m * v[k];
}

std::vector<double> alignment_eval(const AlignmentSpec& spec, const std::vector<double>& v) {
    std::vector<double> out(v.size());
    alignment_eval(spec, v.data(), int(v.size()), out.data());
    return out;
}

double monotonicity_gap(const double* a, const double* b, const double* c, int dim, double p) {
    AlignmentSpec sp{p};
    sp.validate();
    AlignEval al(sp);
    double nac = 0.0, nbc = 0.0, nab = 0.0;
    for (int k = 0; k < dim; ++k) {
        double ac = a[k] - c[k], bc = b[k] - c[k], ab = a[k] - b[k];
        nac += ac * ac;
        nbc += bc * bc;
        nab += ab * ab;
    }
    double mac = al.mag_from_sq(nac), mbc = al.mag_from_sq(nbc);
    double lhs = 0.0;
    for (int k = 0; k < dim; ++k)
        lhs += (a[k] - b[k]) * (mac * (a[k] - c[k]) - mbc * (b[k] - c[k]));
    double rhs = std::pow(2.0, 2.0 - p) * std::pow(nab, p / 2.0);
    return lhs - rhs;
}

double pair_monotonicity_gap(const double* x, const double* y, int dim, double p) {
    AlignmentSpec sp{p};
    sp.validate();
    AlignEval al(sp);
    double nx = 0.0, ny = 0.0, nxy = 0.0;
    for (int k = 0; k < dim; ++k) {
        nx += x[k] * x[k];
        ny += y[k] * y[k];
        double d = x[k] - y[k];
        nxy += d * d;
    }
    double mx = al.mag_from_sq(nx), my = al.mag_from_sq(ny);
    double lhs = 0.0;
    for (int k = 0; k < dim; ++k) lhs += (x[k] - y[k]) * (mx * x[k] - my * y[k]);
    double rhs = std::pow(2.0, 2.0 - p) * std::pow(nxy, p / 2.0);
    return lhs - rhs;
}

double monotonicity_gap(const std::vector<double>& a, const std::vector<double>& b,
                        const std::vector<double>& c, double p) {
    if (a.size() != b.size() || a.size() != c.size())
        throw ParameterError("monotonicity_gap: dimension mismatch");
    return monotonicity_gap(a.data(), b.data(), c.data(), int(a.size()), p);
}

double pair_monotonicity_gap(const std::vector<double>& x, const std::vector<double>& y, double p) {
    if (x.size() != y.size()) throw ParameterError("pair_monotonicity_gap: dimension mismatch");
    return pair_monotonicity_gap(x.data(), y.data(), int(x.size()), p);
}

double noise_eval(const NoiseSpec& spec, double s) {
    if (!(s >= 0.0)) throw ParameterError("noise_eval: strength must be nonnegative");
    if (spec.form == NoiseForm::linear) return spec.sigma2 * s;
    if (!spec.custom) throw ParameterError("noise_eval: custom noise map not set");
    return spec.custom(s);
}

} // namespace flock
