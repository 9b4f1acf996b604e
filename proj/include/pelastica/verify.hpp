#pragma once

// Self-check suite: periodicity, the cn_p power-integral identity, Q_p
// monotonicity, the zero set of cn_p and Euler-Lagrange residuals of the
// constructed curves.

#include <pelastica/curves.hpp>
#include <pelastica/numerics.hpp>
#include <pelastica/pelliptic.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace pelastica {

struct CheckResult {
    std::string group;
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

struct SuiteSummary {
    std::vector<CheckResult> checks;

    int passed() const {
        int n = 0;
        for (const auto &c : checks) n += c.pass;
        return n;
    }
    int total() const { return static_cast<int>(checks.size()); }
    bool all_pass() const { return passed() == total(); }
};

namespace detail {

inline std::string pq_label(double p, double q) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "p=%g q=%g", p, q);
    return buf;
}

inline std::string p_label(double p) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "p=%g", p);
    return buf;
}

inline void check_le(SuiteSummary &out, std::string group, std::string name, double value, double tol) {
    out.checks.push_back({std::move(group), std::move(name), value, tol, std::isfinite(value) && value <= tol});
}

}  // namespace detail

/// Runs every identity check; each failure is recorded, not thrown.
inline SuiteSummary run_identity_suite() {
    SuiteSummary out;
    const std::vector<double> ps{1.5, 2.0, 3.0, 4.0};
    const std::vector<double> xs{-2.3, -0.4, 0.7, 1.3};

    for (double p : ps)
        for (double q : {0.3, 0.7}) {
            const PElliptic f{PParam(p), Modulus(q)};
            double worst_F = 0.0, worst_E = 0.0;
            for (double x : xs)
                for (int n = -2; n <= 2; ++n) {
                    const double shift = n * std::numbers::pi;
                    worst_F = std::max(worst_F, std::abs(f.F(x + shift) - f.F(x) - 2.0 * n * f.K()));
                    worst_E = std::max(worst_E, std::abs(f.E_inc(x + shift) - f.E_inc(x) - 2.0 * n * f.E()));
                }
            detail::check_le(out, "periodicity", "F " + detail::pq_label(p, q), worst_F, 1e-9);
            detail::check_le(out, "periodicity", "E " + detail::pq_label(p, q), worst_E, 1e-9);
        }

    for (double p : ps) {
        std::vector<double> qs{0.2, 0.5, 0.8};
        if (p > 2.0) qs.push_back(1.0);
        for (double q : qs) {
            const PElliptic f{PParam(p), Modulus(q)};
            QuadSpec spec;
            spec.abs_tol = 1e-12;
            spec.rel_tol = 1e-12;
            const double lhs = integrate([&](double x) { return std::pow(std::abs(f.cn(x)), p); }, 0.0, f.K(), spec);
            const double rhs = f.E() / (q * q) + (1.0 - 1.0 / (q * q)) * f.K();
            detail::check_le(out, "cn-power identity", detail::pq_label(p, q), std::abs(lhs - rhs) / std::abs(rhs), 1e-8);
        }
    }

    for (double p : {1.5, 2.0, 3.0, 4.0, 8.0}) {
        const PParam pp(p);
        double prev = p_elliptic_ratio(pp, Modulus(0.0));
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = 1; i < 100; ++i) {
            const double Q = p_elliptic_ratio(pp, Modulus(i / 100.0));
            worst = std::max(worst, Q - prev);
            prev = Q;
        }
        out.checks.push_back({"Q_p monotone", detail::p_label(p), worst, 0.0, worst < 0.0});
    }

    for (double p : ps)
        for (double q : {0.3, 0.7}) {
            const PElliptic f{PParam(p), Modulus(q)};
            double worst = 0.0;
            for (int m = -2; m <= 2; ++m) worst = std::max(worst, std::abs(f.cn((2.0 * m + 1.0) * f.K())));
            detail::check_le(out, "cn zero set", detail::pq_label(p, q), worst, 1e-9);
        }

    {
        const PParam p4(4.0), p3(3.0);
        std::vector<std::pair<std::string, ArcCurve>> curves;
        {
            const double K = p_comp_ellint_1(p4, Modulus(0.5));
            curves.emplace_back("wavelike p=4 q=0.5", sample_wavelike(p4, Modulus(0.5), 0.0, 4.0 * K, 4000));
        }
        {
            const double K = p_comp_ellint_1(p3, Modulus(0.7));
            curves.emplace_back("wavelike p=3 q=0.7", sample_wavelike(p3, Modulus(0.7), 0.0, 4.0 * K, 4000));
        }
        curves.emplace_back("flat-core p=4 +-", build_flat_core(FlatCoreSpec::uniform(p4, {Sign::plus, Sign::minus}, 0.5), 1000));
        for (const auto &[name, c] : curves) {
            const double lambda = estimate_lambda(c);
            detail::check_le(out, "Euler-Lagrange residual", name, el_residual(c, lambda, 20), 1e-5);
        }
    }
    return out;
}

}  // namespace pelastica
