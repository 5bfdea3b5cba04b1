#include "flock/ratefit.hpp"

#include <cmath>

#include "flock/errors.hpp"

namespace flock {

double jbracket(double t) { return std::sqrt(1.0 + t * t); }

static RateFit lsq(const std::vector<double>& X, const std::vector<double>& Y, double lo, double hi) {
    const std::size_t n = X.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += X[i];
        sy += Y[i];
        sxx += X[i] * X[i];
        sxy += X[i] * Y[i];
        syy += Y[i] * Y[i];
    }
    double den = n * sxx - sx * sx;
    RateFit f;
    f.points = int(n);
    f.window_lo = lo;
    f.window_hi = hi;
    if (den <= 0.0) throw ParameterError("rate fit: degenerate abscissa");
    f.exponent = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.exponent * sx) / n;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = Y[i] - (f.intercept + f.exponent * X[i]);
        ss_res += r * r;
    }
    f.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return f;
}

RateFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t_lo,
                      double t_hi) {
    if (t.size() != y.size()) throw ParameterError("rate fit: t/y size mismatch");
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(y[i] > 0.0)) throw ParameterError("rate fit: nonpositive y inside window");
        X.push_back(std::log(jbracket(t[i])));
        Y.push_back(std::log(y[i]));
    }
    if (X.size() < 8) throw ParameterError("rate fit: need at least 8 points in window");
    return lsq(X, Y, t_lo, t_hi);
}

RateFit fit_log_corrected(const std::vector<double>& t, const std::vector<double>& y, double theta,
                          double t_lo, double t_hi) {
    if (t.size() != y.size()) throw ParameterError("rate fit: t/y size mismatch");
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(y[i] > 0.0)) throw ParameterError("rate fit: nonpositive y inside window");
        double br = jbracket(t[i]);
        double lg = std::log(br);
        if (theta != 0.0 && lg <= 0.0)
            throw ParameterError("rate fit: log-compensation needs t > 0 in window");
        double comp = y[i] * br / (theta == 0.0 ? 1.0 : std::pow(lg, theta));
        X.push_back(std::log(br));
        Y.push_back(std::log(comp));
    }
    if (X.size() < 8) throw ParameterError("rate fit: need at least 8 points in window");
    return lsq(X, Y, t_lo, t_hi);
}

RateFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_loglog: bad input");
    std::vector<double> X, Y;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ParameterError("fit_loglog: needs positive data");
        X.push_back(std::log(x[i]));
        Y.push_back(std::log(y[i]));
    }
    return lsq(X, Y, x.front(), x.back());
}

RateFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_linear: bad input");
    return lsq(x, y, x.front(), x.back());
}

} // namespace flock
