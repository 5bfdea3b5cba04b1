#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "flock/lemma_lab.hpp"

using namespace flock;

namespace {
ComparisonSystem make_sys(double beta, double C, double a0, double b0,
                          SourceSpec g = SourceSpec::none()) {
    ComparisonSystem s;
    s.beta = beta;
    s.C = C;
    s.a0 = a0;
    s.b0 = b0;
    s.g = g;
    return s;
}
ComparisonSystem make_log_sys(double alpha, double C, double a0, double b0,
                              SourceSpec g = SourceSpec::none()) {
    ComparisonSystem s;
    s.log_corrected = true;
    s.alpha = alpha;
    s.C = C;
    s.a0 = a0;
    s.b0 = b0;
    s.g = g;
    return s;
}
} // namespace

TEST_CASE("decoupled limit: tiny C gives straight-line a") {
    ComparisonSystem s = make_sys(1.0, 1e-14, 2.0, 3.0);
    SaturatedSolution sol = solve_saturated(s, 10.0, 50);
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        CHECK(sol.a[i] == doctest::Approx(2.0 + 3.0 * sol.t[i]).epsilon(1e-9));
        CHECK(sol.b[i] == doctest::Approx(3.0).epsilon(1e-9));
    }
}

TEST_CASE("beta=0 grows like exp(sqrt(C) t)") {
    // a'=b, b'=C a with a0=b0=1: a+b = 2 e^{sqrt(C) t} exactly when sqrt(C)=1 scaling
    double C = 2.0;
    ComparisonSystem s = make_sys(0.0, C, 1.0, 1.0);
    SaturatedSolution sol = solve_saturated(s, 8.0, 40, false);
    double rt = std::sqrt(C);
    // closed form: a(t) = cosh(rt t) + sinh(rt t)/rt
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        double t = sol.t[i];
        double a_exact = std::cosh(rt * t) + std::sinh(rt * t) / rt;
        CHECK(sol.a[i] == doctest::Approx(a_exact).epsilon(1e-9));
    }
}

TEST_CASE("beta=2 closed form via indicial roots") {
    // a'' = C (1+t)^-2 a is an Euler equation with roots zeta and 1-zeta;
    // for C=2 (zeta=2), a0=1, b0=0: a = (1/3)(1+t)^2 + (2/3)(1+t)^-1
    ComparisonSystem s = make_sys(2.0, 2.0, 1.0, 0.0);
    SaturatedSolution sol = solve_saturated(s, 50.0, 60);
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        double w = 1.0 + sol.t[i];
        double exact = (w * w + 2.0 / w) / 3.0;
        CHECK(sol.a[i] == doctest::Approx(exact).epsilon(1e-9));
    }
    // envelope C5 (1+t)^zeta touches the solution at t=0, then dominates
    EnvelopeReport rep = check_envelope(s, 50.0, 60);
    CHECK(rep.pass);
    CHECK(rep.a_margin.front() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.a.back() / std::pow(1.0 + sol.t.back(), 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
}

TEST_CASE("envelope constants arithmetic") {
    // beta=1, C=2: gamma=1/2, Cbar = (1/2 + sqrt(1/4 + 8)) / 1
    EnvelopeConstants c = envelope_constants(make_sys(1.0, 2.0, 1.0, 1.0));
    CHECK(c.regime == 2);
    CHECK(c.get_gamma() == doctest::Approx(0.5));
    CHECK(c.get_cbar() == doctest::Approx(0.5 + std::sqrt(8.25)));
    // beta=2, C=2: zeta = 2
    EnvelopeConstants c3 = envelope_constants(make_sys(2.0, 2.0, 1.0, 1.0));
    CHECK(c3.regime == 3);
    CHECK(c3.get_zeta() == doctest::Approx(2.0));
    CHECK(c3.C5 == doctest::Approx(1.0 + 2.0 / 2.0)); // a0 + zeta b0 / C
    // log-corrected alpha=0: theta=1, Cbar = zeta
    EnvelopeConstants c4 = envelope_constants(make_log_sys(0.0, 2.0, 1.0, 1.0));
    CHECK(c4.regime == 4);
    CHECK(c4.get_theta() == doctest::Approx(1.0));
    CHECK(c4.get_cbar() == doctest::Approx(2.0));
    // regime-mismatch accessors throw
    CHECK_THROWS_AS(c3.get_gamma(), ParameterError);
    CHECK_THROWS_AS(c.get_zeta(), ParameterError);
    CHECK_THROWS_AS(c.get_theta(), ParameterError);
    CHECK_THROWS_AS(envelope_constants(make_sys(3.0, 1.0, 1.0, 1.0)).get_cbar(), ParameterError);
}

TEST_CASE("case (i): b bounded by a constant, a grows at most linearly") {
    ComparisonSystem s = make_sys(3.0, 1.0, 1.0, 1.0);
    EnvelopeReport rep = check_envelope(s, 1000.0, 200);
    CHECK(rep.pass);
    // b-envelope is the constant C1 for g == 0
    for (double bb : rep.b_bound) CHECK(bb == doctest::Approx(rep.b_bound.front()));
    // numeric b indeed saturates below it
    CHECK(rep.b_numeric.back() < rep.b_bound.back());
}

TEST_CASE("case (ii): sub-exponential envelope with the stated constants") {
    for (double beta : {0.0, 0.5, 1.0, 1.5}) {
        for (double C : {0.1, 1.0, 10.0}) {
            ComparisonSystem s = make_sys(beta, C, 1.0, 0.0);
            double t_end = safe_horizon(s, 200.0);
            EnvelopeReport rep = check_envelope(s, t_end, 120);
            CHECK(rep.pass);
        }
    }
}

TEST_CASE("log-corrected envelope dominates on long horizons") {
    ComparisonSystem s = make_log_sys(0.5, 1.0, 1.0, 1.0);
    double t_end = safe_horizon(s, 1000.0);
    EnvelopeReport rep = check_envelope(s, t_end, 150);
    CHECK(rep.pass);
}

TEST_CASE("Lemma 2.4 at alpha=0 reproduces the beta=2 envelope exactly") {
    for (double C : {0.1, 1.0, 10.0}) {
        for (double a0 : {0.0, 1.0, 5.0}) {
            for (double b0 : {0.0, 1.0, 5.0}) {
                ComparisonSystem s2 = make_sys(2.0, C, a0, b0);
                ComparisonSystem s4 = make_log_sys(0.0, C, a0, b0);
                EnvelopeConstants c2 = envelope_constants(s2);
                EnvelopeConstants c4 = envelope_constants(s4);
                for (double t : {0.0, 0.5, 3.0, 20.0, 500.0}) {
                    double ea2 = envelope_a(s2, c2, t), ea4 = envelope_a(s4, c4, t);
                    double eb2 = envelope_b(s2, c2, t), eb4 = envelope_b(s4, c4, t);
                    CHECK(ea4 == doctest::Approx(ea2).epsilon(1e-9));
                    CHECK(eb4 == doctest::Approx(eb2).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("regime continuity beta -> 2-") {
    double C = 1.0, a0 = 1.0, b0 = 1.0, t = 10.0;
    ComparisonSystem near = make_sys(1.99, C, a0, b0);
    ComparisonSystem crit = make_sys(2.0, C, a0, b0);
    double bn = envelope_a(near, envelope_constants(near), t);
    double bc = envelope_a(crit, envelope_constants(crit), t);
    CHECK(std::fabs(bn - bc) / bc < 0.05);
}

TEST_CASE("Lyapunov functionals: monotone for g=0, regime-checked") {
    // L2 (beta<2)
    {
        ComparisonSystem s = make_sys(1.0, 2.0, 1.0, 1.0);
        std::vector<double> ts;
        auto L = lyapunov_series(s, 50.0, Lyapunov::L2, &ts, 300);
        for (std::size_t i = 1; i < L.size(); ++i) CHECK(L[i] <= L[i - 1] + 1e-8 * L[0]);
        CHECK_THROWS_AS(lyapunov_series(s, 10.0, Lyapunov::L3), ParameterError);
    }
    // L3 (beta=2) is exactly conserved along the saturated flow
    {
        ComparisonSystem s = make_sys(2.0, 1.5, 1.0, 2.0);
        auto L = lyapunov_series(s, 100.0, Lyapunov::L3, nullptr, 200);
        for (std::size_t i = 1; i < L.size(); ++i)
            CHECK(L[i] == doctest::Approx(L[0]).epsilon(1e-8));
    }
    // L4 (log-corrected)
    {
        ComparisonSystem s = make_log_sys(0.5, 1.0, 1.0, 0.0);
        auto L = lyapunov_series(s, 100.0, Lyapunov::L4, nullptr, 200);
        for (std::size_t i = 1; i < L.size(); ++i) CHECK(L[i] <= L[i - 1] + 1e-8 * L[0]);
    }
    // L1 (beta>2) obeys its own Groenwall envelope:
    // L1(t) <= L1(0) exp(C/((beta-1)(beta-2)))
    {
        double C = 1.0, beta = 3.0;
        ComparisonSystem s = make_sys(beta, C, 1.0, 1.0);
        std::vector<double> ts;
        auto L = lyapunov_series(s, 1000.0, Lyapunov::L1, &ts, 300);
        double cap = L[0] * std::exp(C / ((beta - 1.0) * (beta - 2.0)));
        for (double v : L) CHECK(v <= cap * (1.0 + 1e-8));
    }
}

TEST_CASE("Lyapunov increments bounded by the source forcing term") {
    // with g > 0: L2' <= (Cbar gamma)^2 w^{1-gamma} e^{-Cbar w^gamma} g(t)
    ComparisonSystem s = make_sys(1.0, 1.0, 1.0, 1.0, SourceSpec::power(0.5, -1.0));
    EnvelopeConstants c = envelope_constants(s);
    std::vector<double> ts;
    auto L = lyapunov_series(s, 30.0, Lyapunov::L2, &ts, 400);
    double cg = c.Cbar * c.gamma;
    for (std::size_t i = 1; i < L.size(); ++i) {
        double h = ts[i] - ts[i - 1];
        double t0 = ts[i - 1];
        double w = lab_bracket(t0);
        double rate = cg * cg * std::pow(w, 1.0 - c.gamma) *
                      std::exp(-c.Cbar * std::pow(w, c.gamma)) * s.g(t0);
        CHECK(L[i] - L[i - 1] <= rate * h * 1.05 + 1e-10);
    }
}

TEST_CASE("full domination grid: zero violations") {
    // 7 beta x 3 C x 3 a0 x 3 b0 x 3 sources = 567 configurations
    int checked = 0;
    for (double beta : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0})
        for (double C : {0.1, 1.0, 10.0})
            for (double a0 : {0.0, 1.0, 5.0})
                for (double b0 : {0.0, 1.0, 5.0})
                    for (int gi = 0; gi < 3; ++gi) {
                        SourceSpec g = gi == 0 ? SourceSpec::none()
                                               : SourceSpec::power(1.0, gi == 1 ? -1.0 : -2.0);
                        ComparisonSystem s = make_sys(beta, C, a0, b0, g);
                        double t_end = safe_horizon(s, 300.0);
                        EnvelopeReport rep = check_envelope(s, t_end, 60);
                        CHECK(rep.pass);
                        ++checked;
                    }
    CHECK(checked == 567);
}

TEST_CASE("tabulated source term") {
    SourceSpec g;
    g.kind = SourceKind::tabulated;
    g.ts = {0.0, 1.0, 2.0};
    g.gs = {1.0, 0.5, 0.0};
    CHECK(g(0.5) == doctest::Approx(0.75));
    CHECK(g(5.0) == 0.0);
    ComparisonSystem s = make_sys(2.5, 1.0, 1.0, 0.0, g);
    EnvelopeReport rep = check_envelope(s, 50.0, 60);
    CHECK(rep.pass);
}

TEST_CASE("invalid systems rejected") {
    CHECK_THROWS_AS(solve_saturated(make_sys(1.0, -1.0, 1.0, 1.0), 1.0), ParameterError);
    CHECK_THROWS_AS(solve_saturated(make_sys(1.0, 1.0, -1.0, 1.0), 1.0), ParameterError);
    CHECK_THROWS_AS(solve_saturated(make_log_sys(1.0, 1.0, 1.0, 1.0), 1.0), ParameterError);
    CHECK_THROWS_AS(solve_saturated(make_sys(1.0, 1.0, 1.0, 1.0), -2.0), ParameterError);
}
