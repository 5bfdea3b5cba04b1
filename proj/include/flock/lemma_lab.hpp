#pragma once

#include <vector>

#include "flock/errors.hpp"

namespace flock {

// Comparison system  a' = b,  b' = C w(t)^-beta a + g(t)  (saturated form of
// the paired differential inequalities), or the log-corrected variant
// b' = C w(t)^-2 (log-term)^{2a/(1-a)} a + g(t).
//
// The lab's time bracket w(t) = 1 + t has unit slope, which is exactly what
// the Lyapunov constructions require: with it every rescaling identity below
// is an equality and the stated envelope constants are valid verbatim. The
// bracket sqrt(1+t^2) used for rate fits elsewhere is equivalent to within a
// factor sqrt(2), but its slope t/<t> < 1 breaks the cancellations near t=0
// (the constant-kernel case beta=0, a0=1, b0=0 has a(t)=cosh t, which
// overshoots the sqrt-bracket envelope by ~23%). Hence the two brackets are
// kept deliberately distinct.
double lab_bracket(double t);     // 1 + t
double lab_log_bracket(double t); // 1 + log(1 + t)

enum class SourceKind { zero, power, tabulated };

struct SourceSpec {
    SourceKind kind = SourceKind::zero;
    double c = 0.0, q = 0.0;      // power: c * w(t)^q
    std::vector<double> ts, gs;   // tabulated, linear interpolation

    double operator()(double t) const;
    static SourceSpec none() { return {}; }
    static SourceSpec power(double c, double q) {
        SourceSpec s;
        s.kind = SourceKind::power;
        s.c = c;
        s.q = q;
        return s;
    }
};

struct ComparisonSystem {
    double beta = 0.0;        // drift decay exponent, >= 0
    bool log_corrected = false;
    double alpha = 0.0;       // log-corrected variant, in [0,1)
    double C = 1.0;           // coupling, > 0
    double a0 = 0.0, b0 = 0.0;
    SourceSpec g;

    void validate() const;
    double drift_coefficient(double t) const; // C w^-beta or log-corrected drift
    // Regimes: 1: beta>2, 2: beta<2, 3: beta==2, 4: log-corrected.
    int regime() const;
};

struct SaturatedSolution {
    std::vector<double> t, a, b;
};

// High-accuracy solve of the equality system; it dominates every solution of
// the inequality system, so envelope checks on it certify the lemma content.
SaturatedSolution solve_saturated(const ComparisonSystem& sys, double t_end, int samples = 400,
                                  bool log_spacing = true);

struct EnvelopeConstants {
    int regime = 0;
    double gamma = 0.0, zeta = 0.0, theta = 0.0, Cbar = 0.0;
    // case (i)
    double C1 = 0.0, C2 = 0.0;
    // case (ii)
    double C3 = 0.0, C4 = 0.0;
    // case (iii)
    double C5 = 0.0, C6 = 0.0;
    // log-corrected
    double C7 = 0.0, C8 = 0.0;

    double get_gamma() const;
    double get_zeta() const;
    double get_theta() const;
    double get_cbar() const;
};

EnvelopeConstants envelope_constants(const ComparisonSystem& sys);

// Closed-form envelope values at time t (source integrals by quadrature).
double envelope_a(const ComparisonSystem& sys, const EnvelopeConstants& c, double t);
double envelope_b(const ComparisonSystem& sys, const EnvelopeConstants& c, double t);

struct EnvelopeReport {
    std::vector<double> times;
    std::vector<double> a_numeric, b_numeric;
    std::vector<double> a_bound, b_bound;
    std::vector<double> a_margin, b_margin; // bound - numeric
    EnvelopeConstants constants;
    bool pass = true;
    double first_violation_time = -1.0;
    double worst_relative_margin = 0.0; // min over samples of margin / bound
};

// Comparison tolerance: relative 1e-6 plus absolute 1e-9.
EnvelopeReport check_envelope(const ComparisonSystem& sys, double t_end, int samples = 400);

enum class Lyapunov { L1, L2, L3, L4 };

// Functional along the saturated solution. For g == 0: L2, L3, L4 are
// non-increasing; L1 obeys its own Groenwall envelope.
std::vector<double> lyapunov_series(const ComparisonSystem& sys, double t_end, Lyapunov which,
                                    std::vector<double>* times_out = nullptr, int samples = 400);

// Largest horizon keeping the envelope exponent below `max_exponent`
// (overflow guard for the fast-growth regimes).
double safe_horizon(const ComparisonSystem& sys, double t_max, double max_exponent = 500.0);

} // namespace flock
