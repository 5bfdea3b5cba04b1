#include "flock/lemma_lab.hpp"

#include <algorithm>
#include <cmath>

#include "flock/ode.hpp"
#include "flock/quadrature.hpp"

namespace flock {

double lab_bracket(double t) { return 1.0 + t; }
double lab_log_bracket(double t) { return 1.0 + std::log1p(t); }

double SourceSpec::operator()(double t) const {
    switch (kind) {
        case SourceKind::zero: return 0.0;
        case SourceKind::power: return c * std::pow(lab_bracket(t), q);
        case SourceKind::tabulated: {
            if (ts.empty()) return 0.0;
            if (t <= ts.front()) return gs.front();
            if (t >= ts.back()) return gs.back();
            auto it = std::upper_bound(ts.begin(), ts.end(), t);
            std::size_t hi = std::size_t(it - ts.begin()), lo = hi - 1;
            double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
            return gs[lo] + w * (gs[hi] - gs[lo]);
        }
    }
    return 0.0;
}

void ComparisonSystem::validate() const {
    if (!(C > 0.0)) throw ParameterError("comparison system: C must be positive");
    if (!(a0 >= 0.0) || !(b0 >= 0.0)) throw ParameterError("comparison system: a0,b0 >= 0");
    if (log_corrected) {
        if (!(alpha >= 0.0 && alpha < 1.0))
            throw ParameterError("comparison system: alpha in [0,1) required");
    } else if (!(beta >= 0.0)) {
        throw ParameterError("comparison system: beta >= 0 required");
    }
}

double ComparisonSystem::drift_coefficient(double t) const {
    double w = lab_bracket(t);
    if (!log_corrected) return C * std::pow(w, -beta);
    double theta = 1.0 / (1.0 - alpha);
    double lg = lab_log_bracket(t);
    return C * std::pow(w, -2.0) * std::pow(lg, 2.0 * (theta - 1.0));
}

int ComparisonSystem::regime() const {
    if (log_corrected) return 4;
    if (beta > 2.0) return 1;
    if (beta == 2.0) return 3;
    return 2;
}

SaturatedSolution solve_saturated(const ComparisonSystem& sys, double t_end, int samples,
                                  bool log_spacing) {
    sys.validate();
    if (!(t_end > 0.0)) throw ParameterError("solve_saturated: t_end must be positive");

    auto rhs = [&sys](double t, const std::vector<double>& y, std::vector<double>& d) {
        d.resize(2);
        d[0] = y[1];
        d[1] = sys.drift_coefficient(t) * y[0] + sys.g(t);
    };
    AdaptiveOpts o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    o.dt_init = 1e-4;
    Dopri5<decltype(rhs)&> solver(rhs, o);

    SaturatedSolution out;
    out.t.push_back(0.0);
    out.a.push_back(sys.a0);
    out.b.push_back(sys.b0);
    std::vector<double> grid;
    if (log_spacing) {
        double t0 = std::min(1e-2, t_end);
        double ratio = std::pow(t_end / t0, 1.0 / double(samples - 1));
        double t = t0;
        for (int k = 0; k < samples; ++k) {
            grid.push_back(std::min(t, t_end));
            t *= ratio;
        }
        grid.back() = t_end;
    } else {
        for (int k = 1; k <= samples; ++k) grid.push_back(t_end * k / double(samples));
    }
    std::vector<double> y = {sys.a0, sys.b0};
    double t = 0.0;
    for (double t1 : grid) {
        if (t1 <= t) continue;
        solver.integrate(t, y, t1, [](double, const std::vector<double>&) {});
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
            throw IntegrationError("saturated system overflow", t);
        out.t.push_back(t1);
        out.a.push_back(y[0]);
        out.b.push_back(y[1]);
    }
    return out;
}

double EnvelopeConstants::get_gamma() const {
    if (regime != 2) throw ParameterError("gamma is defined only for beta < 2");
    return gamma;
}
double EnvelopeConstants::get_zeta() const {
    if (regime != 3) throw ParameterError("zeta is defined only for beta == 2");
    return zeta;
}
double EnvelopeConstants::get_theta() const {
    if (regime != 4) throw ParameterError("theta is defined only for the log-corrected system");
    return theta;
}
double EnvelopeConstants::get_cbar() const {
    if (regime == 1 || regime == 3)
        throw ParameterError("Cbar is defined only for beta < 2 or the log-corrected system");
    return Cbar;
}

EnvelopeConstants envelope_constants(const ComparisonSystem& sys) {
    sys.validate();
    EnvelopeConstants c;
    c.regime = sys.regime();
    const double C = sys.C;
    switch (c.regime) {
        case 1: {
            double beta = sys.beta;
            // Groenwall factor exp(C/(beta-1) * int_0^inf w^{1-beta}) with
            // w = 1+t, where the integral is exactly 1/(beta-2).
            double E = std::exp(C / ((beta - 1.0) * (beta - 2.0)));
            c.C1 = (C / (beta - 1.0) * sys.a0 + sys.b0) * E;
            c.C2 = E;
            break;
        }
        case 2: {
            c.gamma = 1.0 - sys.beta / 2.0;
            c.Cbar = ((1.0 - c.gamma) + std::sqrt((1.0 - c.gamma) * (1.0 - c.gamma) + 4.0 * C)) /
                     (2.0 * c.gamma);
            double cg = c.Cbar * c.gamma;
            c.C3 = (sys.a0 + cg * sys.b0 / C) * std::exp(-c.Cbar);
            c.C4 = (C / cg * sys.a0 + sys.b0) * std::exp(-c.Cbar);
            break;
        }
        case 3: {
            c.zeta = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * C));
            c.C5 = sys.a0 + c.zeta * sys.b0 / C;
            c.C6 = C / c.zeta * sys.a0 + sys.b0;
            break;
        }
        case 4: {
            c.theta = 1.0 / (1.0 - sys.alpha);
            c.Cbar = (1.0 + std::sqrt(1.0 + 4.0 * C)) / (2.0 * c.theta);
            double ct = c.Cbar * c.theta;
            c.C7 = (sys.a0 + ct * sys.b0 / C) * std::exp(-c.Cbar);
            c.C8 = (C / ct * sys.a0 + sys.b0) * std::exp(-c.Cbar);
            break;
        }
    }
    return c;
}

namespace {

// Source integrals G1..G4 of the four regimes, adaptive Simpson at 1e-10.
double source_integral(const ComparisonSystem& sys, const EnvelopeConstants& c, double t) {
    if (sys.g.kind == SourceKind::zero || t <= 0.0) return 0.0;
    switch (c.regime) {
        case 1:
            return integrate([&](double s) { return sys.g(s); }, 0.0, t);
        case 2:
            return integrate(
                [&](double s) {
                    double w = lab_bracket(s);
                    return std::pow(w, 1.0 - c.gamma) * std::exp(-c.Cbar * std::pow(w, c.gamma)) *
                           sys.g(s);
                },
                0.0, t);
        case 3:
            return integrate(
                [&](double s) { return std::pow(lab_bracket(s), -(c.zeta - 1.0)) * sys.g(s); },
                0.0, t);
        case 4:
            return integrate(
                [&](double s) {
                    double w = lab_bracket(s), lg = lab_log_bracket(s);
                    return w * std::pow(lg, -(c.theta - 1.0)) *
                           std::exp(-c.Cbar * std::pow(lg, c.theta)) * sys.g(s);
                },
                0.0, t);
    }
    return 0.0;
}

// double integral of G1 for the case (i) a-bound, via Fubini
double double_source_integral(const ComparisonSystem& sys, double t) {
    if (sys.g.kind == SourceKind::zero || t <= 0.0) return 0.0;
    return integrate([&](double s) { return (t - s) * sys.g(s); }, 0.0, t);
}

} // namespace

double envelope_a(const ComparisonSystem& sys, const EnvelopeConstants& c, double t) {
    double w = lab_bracket(t);
    switch (c.regime) {
        case 1:
            return sys.a0 + c.C1 * t + c.C2 * double_source_integral(sys, t);
        case 2:
            return (c.C3 + c.Cbar * c.gamma / sys.C * source_integral(sys, c, t)) *
                   std::exp(c.Cbar * std::pow(w, c.gamma));
        case 3:
            return (c.C5 + c.zeta / sys.C * source_integral(sys, c, t)) * std::pow(w, c.zeta);
        case 4: {
            double lg = lab_log_bracket(t);
            return (c.C7 + c.Cbar * c.theta / sys.C * source_integral(sys, c, t)) *
                   std::exp(c.Cbar * std::pow(lg, c.theta));
        }
    }
    return 0.0;
}

double envelope_b(const ComparisonSystem& sys, const EnvelopeConstants& c, double t) {
    double w = lab_bracket(t);
    switch (c.regime) {
        case 1:
            return c.C1 + c.C2 * source_integral(sys, c, t);
        case 2:
            return (c.C4 + source_integral(sys, c, t)) * std::pow(w, -(1.0 - c.gamma)) *
                   std::exp(c.Cbar * std::pow(w, c.gamma));
        case 3:
            return (c.C6 + source_integral(sys, c, t)) * std::pow(w, c.zeta - 1.0);
        case 4: {
            double lg = lab_log_bracket(t);
            return (c.C8 + source_integral(sys, c, t)) / w * std::pow(lg, c.theta - 1.0) *
                   std::exp(c.Cbar * std::pow(lg, c.theta));
        }
    }
    return 0.0;
}

EnvelopeReport check_envelope(const ComparisonSystem& sys, double t_end, int samples) {
    EnvelopeReport rep;
    rep.constants = envelope_constants(sys);
    SaturatedSolution sol = solve_saturated(sys, t_end, samples);
    rep.times = sol.t;
    rep.a_numeric = sol.a;
    rep.b_numeric = sol.b;
    rep.worst_relative_margin = 1e300;
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        double ab = envelope_a(sys, rep.constants, sol.t[i]);
        double bb = envelope_b(sys, rep.constants, sol.t[i]);
        rep.a_bound.push_back(ab);
        rep.b_bound.push_back(bb);
        rep.a_margin.push_back(ab - sol.a[i]);
        rep.b_margin.push_back(bb - sol.b[i]);
        for (int which = 0; which < 2; ++which) {
            double bound = which == 0 ? ab : bb;
            double num = which == 0 ? sol.a[i] : sol.b[i];
            double tol = 1e-6 * std::fabs(bound) + 1e-9;
            double rel = bound != 0.0 ? (bound - num) / std::fabs(bound) : (num > 0 ? -1.0 : 0.0);
            rep.worst_relative_margin = std::min(rep.worst_relative_margin, rel);
            if (num > bound + tol && rep.pass) {
                rep.pass = false;
                rep.first_violation_time = sol.t[i];
            }
        }
    }
    return rep;
}

std::vector<double> lyapunov_series(const ComparisonSystem& sys, double t_end, Lyapunov which,
                                    std::vector<double>* times_out, int samples) {
    EnvelopeConstants c = envelope_constants(sys);
    int need = which == Lyapunov::L1 ? 1 : which == Lyapunov::L2 ? 2 : which == Lyapunov::L3 ? 3 : 4;
    if (c.regime != need)
        throw ParameterError("lyapunov_series: functional does not match the system regime");
    SaturatedSolution sol = solve_saturated(sys, t_end, samples);
    std::vector<double> L(sol.t.size());
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        double t = sol.t[i], a = sol.a[i], b = sol.b[i];
        double w = lab_bracket(t);
        switch (which) {
            case Lyapunov::L1:
                L[i] = sys.C / (sys.beta - 1.0) * std::pow(w, 1.0 - sys.beta) * a + b;
                break;
            case Lyapunov::L2: {
                double cg = c.Cbar * c.gamma;
                double e = std::exp(-c.Cbar * std::pow(w, c.gamma));
                double at = cg * e * a;
                double bt = std::pow(w, 1.0 - c.gamma) * e * b;
                L[i] = sys.C * at + cg * cg * bt;
                break;
            }
            case Lyapunov::L3: {
                double at = std::pow(w, -c.zeta) * a;
                double bt = std::pow(w, -(c.zeta - 1.0)) * b / c.zeta;
                L[i] = sys.C * at + c.zeta * c.zeta * bt;
                break;
            }
            case Lyapunov::L4: {
                double lg = lab_log_bracket(t);
                double ct = c.Cbar * c.theta;
                double e = std::exp(-c.Cbar * std::pow(lg, c.theta));
                double at = ct * e * a;
                double bt = w * std::pow(lg, -(c.theta - 1.0)) * e * b;
                L[i] = sys.C * at + ct * ct * bt;
                break;
            }
        }
    }
    if (times_out) *times_out = sol.t;
    return L;
}

double safe_horizon(const ComparisonSystem& sys, double t_max, double max_exponent) {
    EnvelopeConstants c = envelope_constants(sys);
    switch (c.regime) {
        case 2: {
            // Cbar * (1+t)^gamma <= max_exponent
            double lim = std::pow(max_exponent / c.Cbar, 1.0 / c.gamma) - 1.0;
            return std::max(1.0, std::min(t_max, lim));
        }
        case 4: {
            double lim = std::exp(std::pow(max_exponent / c.Cbar, 1.0 / c.theta) - 1.0) - 1.0;
            return std::max(1.0, std::min(t_max, lim));
        }
        default:
            return t_max;
    }
}

} // namespace flock
