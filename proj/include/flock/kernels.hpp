#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "flock/errors.hpp"

namespace flock {

// pow(x, e) for x > 0 with the exponent fixed up front. Quarter- and
// half-integer exponents (the ones every production run here uses) reduce to
// sqrt chains, which is several times cheaper than std::pow in the pairwise
// loops.
struct FixedPow {
    enum Kind { k_zero, k_one, k_half, k_quarter, k_three_quarter, k_three_half, k_two, k_generic };
    Kind kind = k_generic;
    double e = 1.0;
    bool invert = false;

    static FixedPow make(double exponent) {
        FixedPow f;
        f.invert = exponent < 0.0;
        double a = std::fabs(exponent);
        f.e = a;
        if (a == 0.0) f.kind = k_zero;
        else if (a == 1.0) f.kind = k_one;
        else if (a == 0.5) f.kind = k_half;
        else if (a == 0.25) f.kind = k_quarter;
        else if (a == 0.75) f.kind = k_three_quarter;
        else if (a == 1.5) f.kind = k_three_half;
        else if (a == 2.0) f.kind = k_two;
        else f.kind = k_generic;
        return f;
    }

    double operator()(double x) const {
        double y;
        switch (kind) {
            case k_zero: y = 1.0; break;
            case k_one: y = x; break;
            case k_half: y = std::sqrt(x); break;
            case k_quarter: y = std::sqrt(std::sqrt(x)); break;
            case k_three_quarter: { double q = std::sqrt(std::sqrt(x)); y = q * q * q; } break;
            case k_three_half: y = x * std::sqrt(x); break;
            case k_two: y = x * x; break;
            default: y = std::pow(x, e); break;
        }
        return invert ? 1.0 / y : y;
    }
};

enum class KernelForm { power_law, custom_table };

// Communication protocol phi: radial, non-increasing, bounded. The canonical
// family is phi(r) = (1+r)^(-alpha), alpha in [0,1). The sandwich constants
// (lambda, Lambda, r0) record a fat-tail certificate lambda r^-alpha <=
// phi(r) <= Lambda r^-alpha for r > r0; for the canonical family
// lambda = 2^-alpha, Lambda = 1, r0 = 1 works (library default, checked by
// tests, not prescribed anywhere else).
struct KernelSpec {
    KernelForm form = KernelForm::power_law;
    double alpha = 0.0;
    double lambda = 1.0;
    double Lambda = 1.0;
    double r0 = 1.0;
    std::vector<double> table_r;   // custom_table: strictly increasing, table_r[0] == 0
    std::vector<double> table_phi; // custom_table: nonnegative, non-increasing

    static KernelSpec power(double alpha);
    static KernelSpec table(std::vector<double> r, std::vector<double> phi);
    void validate() const;
};

double phi_eval(const KernelSpec& spec, double r);

// Bound evaluator for hot loops; resolves the form and exponent once.
class KernelEval {
public:
    explicit KernelEval(const KernelSpec& spec)
        : spec_(&spec), pw_(FixedPow::make(-spec.alpha)),
          is_power_(spec.form == KernelForm::power_law) {}

    double operator()(double r) const {
        if (is_power_) return pw_(1.0 + r);
        return phi_eval(*spec_, r);
    }

private:
    const KernelSpec* spec_;
    FixedPow pw_;
    bool is_power_;
};

// Velocity coupling A(v) = |v|^(p-2) v, p >= 2. A(0) = 0 by the continuous
// extension (|v|^(p-2) is only Hoelder at 0 when p < 3, so the zero vector is
// set explicitly rather than evaluated).
struct AlignmentSpec {
    double p = 2.0;

    void validate() const {
        if (!(p >= 2.0)) throw ParameterError("alignment exponent p must be >= 2");
    }
};

// |v|^(p-2) computed from |v|^2; returns 0 at v = 0.
class AlignEval {
public:
    explicit AlignEval(const AlignmentSpec& spec) : pw_(FixedPow::make((spec.p - 2.0) / 2.0)) {
        spec.validate();
        identity_ = spec.p == 2.0;
    }
    double mag_from_sq(double n2) const {
        if (identity_) return 1.0;
        if (n2 <= 0.0) return 0.0;
        return pw_(n2);
    }

private:
    FixedPow pw_;
    bool identity_ = false;
};

void alignment_eval(const AlignmentSpec& spec, const double* v, int dim, double* out);
std::vector<double> alignment_eval(const AlignmentSpec& spec, const std::vector<double>& v);

// Lemma quantities: both are >= 0 for p >= 2, vanish when a=b (resp. x=y)
// and when c is the midpoint of a and b.
double monotonicity_gap(const double* a, const double* b, const double* c, int dim, double p);
double pair_monotonicity_gap(const double* x, const double* y, int dim, double p);

double monotonicity_gap(const std::vector<double>& a, const std::vector<double>& b,
                        const std::vector<double>& c, double p);
double pair_monotonicity_gap(const std::vector<double>& x, const std::vector<double>& y, double p);

enum class NoiseForm { linear, custom };

// Diffusion strength map h: Lipschitz with h(0) = 0 and h(s) > 0 for s > 0.
// Default h(s) = sigma2 * s, the simplest map with both properties.
struct NoiseSpec {
    NoiseForm form = NoiseForm::linear;
    double sigma2 = 0.0;
    std::function<double(double)> custom;

    static NoiseSpec linear(double sigma2) {
        NoiseSpec n;
        n.form = NoiseForm::linear;
        n.sigma2 = sigma2;
        return n;
    }
};

double noise_eval(const NoiseSpec& spec, double s);

} // namespace flock
