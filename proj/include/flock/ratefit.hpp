#pragma once

#include <vector>

namespace flock {

// Japanese bracket <t> = sqrt(1+t^2); every rate in this library is stated
// against log<t>, not log t.
double jbracket(double t);

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    int points = 0;
};

// Least-squares slope of log y against log<t> over the window [t_lo, t_hi].
// Requires y > 0 on the window and at least 8 points.
RateFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t_lo,
                      double t_hi);

// Slope of the compensated series y * <t> / (log<t>)^theta against log<t>;
// a near-zero slope confirms the <t>^-1 (log<t>)^theta rate class.
RateFit fit_log_corrected(const std::vector<double>& t, const std::vector<double>& y, double theta,
                          double t_lo, double t_hi);

// Plain log-log fit (used for scaling in N where no bracket applies).
RateFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Least squares line y = a + b x; returns {b, a, r^2} in a RateFit.
RateFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

} // namespace flock
