#pragma once

// Adaptive quadrature and bracketed root finding shared by every other module.

#include <pelastica/error.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <type_traits>
#include <vector>

namespace pelastica {

/// Tolerances for `integrate`.
///
/// A flagged end is treated as carrying an integrable power-law singularity
/// `|x - end|^e` with `e >= end_exponents[i] > -1`. Only a lower bound on the
/// exponent is needed: the substitution `u = d^(1 + e)` leaves a bounded
/// integrand for any true exponent at or above it.
struct QuadSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 60;
    std::array<bool, 2> singular_ends{false, false};
    std::array<double, 2> end_exponents{-0.5, -0.5};

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw DomainError("QuadSpec: tolerances must be positive");
        if (max_depth < 1)
            throw DomainError("QuadSpec: max_depth must be at least 1");
        for (double e : end_exponents)
            if (!(e > -1.0) || !std::isfinite(e))
                throw DomainError("QuadSpec: end exponents must exceed -1");
    }
};

/// Tolerances for `find_root_monotone`. The final bracket satisfies
/// `hi - lo <= tol + rel_tol * |x|`.
struct RootSpec {
    double tol = 1e-14;
    int max_iter = 200;
    double rel_tol = 0.0;

    void validate() const {
        if (!(tol > 0.0) || rel_tol < 0.0)
            throw DomainError("RootSpec: tol must be positive");
        if (max_iter < 1)
            throw DomainError("RootSpec: max_iter must be at least 1");
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

/// Function value together with its derivative; returning this from the
/// callable handed to `find_root_monotone` enables safeguarded Newton steps.
struct ValueSlope {
    double value;
    double slope;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

[[noreturn]] inline void throw_nan_at(double x) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "integrand returned NaN at x = " << x;
    throw NumericalError(msg.str(), std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::infinity());
}

template <class F>
double checked_eval(F &f, double x) {
    const double y = f(x);
    if (std::isnan(y)) throw_nan_at(x);
    return y;
}

template <class F>
QuadResult gauss_kronrod15(F &f, double a, double b) {
    constexpr double epmach = std::numeric_limits<double>::epsilon();
    constexpr double uflow = std::numeric_limits<double>::min();

    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);
    const double dhlgth = std::abs(hlgth);

    std::array<double, 7> fv1{}, fv2{};
    const double fc = checked_eval(f, centr);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);
    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = hlgth * kXgk[jtw];
        const double f1 = checked_eval(f, centr - absc);
        const double f2 = checked_eval(f, centr + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = hlgth * kXgk[jtwm1];
        const double f1 = checked_eval(f, centr - absc);
        const double f2 = checked_eval(f, centr + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    QuadResult out;
    out.value = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;
    double err = std::abs((resk - resg) * hlgth);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > uflow / (50.0 * epmach)) err = std::max(epmach * 50.0 * resabs, err);
    out.error = err;
    return out;
}

struct Segment {
    double a, b;
    QuadResult r;
    int depth;
    bool operator<(const Segment &o) const { return r.error < o.r.error; }
};

// Globally adaptive Gauss-Kronrod on a regular integrand.
template <class F>
QuadResult adaptive_gk(F &f, double a, double b, double abs_tol, double rel_tol, int max_depth) {
    std::priority_queue<Segment> heap;
    const QuadResult first = gauss_kronrod15(f, a, b);
    heap.push({a, b, first, 0});
    double total = first.value;
    double total_err = first.error;

    constexpr std::size_t kMaxSegments = 1u << 16;
    while (total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        Segment worst = heap.top();
        if (worst.depth >= max_depth || heap.size() >= kMaxSegments)
            throw NumericalError("quadrature did not converge within max_depth", total, total_err);
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const QuadResult left = gauss_kronrod15(f, worst.a, mid);
        const QuadResult right = gauss_kronrod15(f, mid, worst.b);
        heap.push({worst.a, mid, left, worst.depth + 1});
        heap.push({mid, worst.b, right, worst.depth + 1});
        total += left.value + right.value - worst.r.value;
        total_err += left.error + right.error - worst.r.error;
        // The running error sum can drift negative from cancellation; resum.
        if (total_err < 0.0) {
            auto copy = heap;
            total_err = 0.0;
            while (!copy.empty()) {
                total_err += copy.top().r.error;
                copy.pop();
            }
        }
    }

    QuadResult out;
    while (!heap.empty()) {
        out.value += heap.top().r.value;
        out.error += heap.top().r.error;
        heap.pop();
    }
    return out;
}

// Evaluates f at x, passing the exact distances to both ends when f accepts them.
template <class F>
double call_integrand(F &f, double x, double from_a, double to_b) {
    if constexpr (std::is_invocable_r_v<double, F &, double, double, double>)
        return f(x, from_a, to_b);
    else
        return f(x);
}

}  // namespace detail

/// Integrates f over [a, b] and reports the achieved error bound.
///
/// `f` is either `double(double x)` or `double(double x, double from_a, double to_b)`;
/// the second form receives distances to the endpoints computed without
/// cancellation, which keeps near-endpoint evaluations accurate.
template <class F>
QuadResult integrate_with_error(F &&f, double a, double b, const QuadSpec &spec = {}) {
    spec.validate();
    if (!(a <= b)) throw DomainError("integrate: requires a <= b");
    if (a == b) return {};
    const double width = b - a;

    const bool left = spec.singular_ends[0];
    const bool right = spec.singular_ends[1];
    if (left && right) {
        const double mid = a + 0.5 * width;
        QuadSpec half = spec;
        half.abs_tol = 0.5 * spec.abs_tol;
        half.singular_ends = {true, false};
        const QuadResult lo = integrate_with_error(f, a, mid, half);
        half.singular_ends = {false, true};
        const QuadResult hi = integrate_with_error(f, mid, b, half);
        return {lo.value + hi.value, lo.error + hi.error};
    }

    if (left || right) {
        const double e = left ? spec.end_exponents[0] : spec.end_exponents[1];
        const double power = 1.0 + e;
        auto g = [&](double u) {
            const double d = std::pow(u, 1.0 / power);
            if (d == 0.0) return 0.0;
            const double x = left ? a + d : b - d;
            const double from_a = left ? d : width - d;
            const double to_b = left ? width - d : d;
            return detail::call_integrand(f, x, from_a, to_b) * std::pow(d, -e) / power;
        };
        return detail::adaptive_gk(g, 0.0, std::pow(width, power), spec.abs_tol, spec.rel_tol,
                                   spec.max_depth);
    }

    auto g = [&](double x) { return detail::call_integrand(f, x, x - a, b - x); };
    return detail::adaptive_gk(g, a, b, spec.abs_tol, spec.rel_tol, spec.max_depth);
}

/// Integrates f over [a, b] to within max(abs_tol, rel_tol * |I|).
template <class F>
double integrate(F &&f, double a, double b, const QuadSpec &spec = {}) {
    return integrate_with_error(std::forward<F>(f), a, b, spec).value;
}

/// Finds the unique root of a continuous strictly monotone function on [lo, hi].
///
/// If `f` returns `ValueSlope`, Newton steps are taken whenever they stay inside
/// the current bracket; otherwise the method is plain bisection. The result is
/// whichever final bracket end has the smaller |f|.
template <class F>
double find_root_monotone(F &&f, double lo, double hi, const RootSpec &spec = {},
                          std::optional<double> guess = std::nullopt) {
    spec.validate();
    if (!(lo <= hi)) throw DomainError("find_root_monotone: requires lo <= hi");

    constexpr bool has_slope = std::is_same_v<std::decay_t<std::invoke_result_t<F &, double>>, ValueSlope>;
    auto eval = [&](double x) -> ValueSlope {
        if constexpr (has_slope) {
            ValueSlope v = f(x);
            if (std::isnan(v.value)) throw NumericalError("root function returned NaN", x, 0.0);
            return v;
        } else {
            const double v = f(x);
            if (std::isnan(v)) throw NumericalError("root function returned NaN", x, 0.0);
            return {v, std::numeric_limits<double>::quiet_NaN()};
        }
    };

    ValueSlope flo = eval(lo);
    if (flo.value == 0.0) return lo;
    ValueSlope fhi = eval(hi);
    if (fhi.value == 0.0) return hi;
    if (std::signbit(flo.value) == std::signbit(fhi.value))
        throw NumericalError("find_root_monotone: no bracket", lo, hi);
    const bool lo_negative = std::signbit(flo.value);

    auto width_ok = [&](double a, double b) {
        const double scale = std::max(std::abs(a), std::abs(b));
        return b - a <= spec.tol + spec.rel_tol * scale;
    };
    auto best_end = [&]() { return std::abs(flo.value) <= std::abs(fhi.value) ? lo : hi; };

    double x = (guess && *guess > lo && *guess < hi) ? *guess : 0.5 * (lo + hi);
    for (int iter = 0; iter < spec.max_iter; ++iter) {
        const ValueSlope fx = eval(x);
        if (fx.value == 0.0) return x;
        if (std::signbit(fx.value) == lo_negative) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if (width_ok(lo, hi)) return best_end();

        double next = 0.5 * (lo + hi);
        if constexpr (has_slope) {
            if (std::isfinite(fx.slope) && fx.slope != 0.0) {
                const double step = -fx.value / fx.slope;
                const double cand = x + step;
                if (cand > lo && cand < hi) {
                    const double tol_here = spec.tol + spec.rel_tol * std::abs(x);
                    // Tiny Newton steps approach from one side; push past the
                    // root so the bracket closes.
                    if (std::abs(step) < 0.5 * tol_here) {
                        const double nudged = x + std::copysign(0.5 * tol_here, step);
                        next = (nudged > lo && nudged < hi) ? nudged : cand;
                    } else {
                        next = cand;
                    }
                }
            }
        }
        if (next <= lo || next >= hi) next = 0.5 * (lo + hi);
        // No representable interior point left.
        if (next <= lo || next >= hi || next == x) return best_end();
        x = next;
    }
    throw NumericalError("find_root_monotone: max_iter exceeded", lo, hi);
}

}  // namespace pelastica
