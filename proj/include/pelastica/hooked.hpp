#pragma once

// Hooked p-elasticae: fixed horizontal displacement and terminal tangent -e1.
// Classification into the wavelike and flat-core branches, construction,
// boundary-condition checks and closed-form minimal energies.

#include <pelastica/curves.hpp>
#include <pelastica/error.hpp>
#include <pelastica/pelliptic.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace pelastica {

struct HookedProblem {
    PParam p;
    double ell;
    double L;

    HookedProblem(PParam p_, double ell_, double L_) : p(p_), ell(ell_), L(L_) { validate(); }

    void validate() const {
        if (!std::isfinite(ell) || !std::isfinite(L) || !(ell > 0.0 && ell < L))
            throw DomainError("hooked problem requires 0 < ell < L");
    }
    double ratio() const { return ell / L; }
};

enum class HookedKind { wavelike, flatcore };

inline std::string to_string(HookedKind k) { return k == HookedKind::wavelike ? "wavelike" : "flatcore"; }

/// Wavelike iff p <= 2 or ell/L < 1/(p-1); the boundary belongs to the flat-core branch.
inline HookedKind classify_branch(const HookedProblem &prob) {
    const double p = prob.p.value();
    if (p <= 2.0) return HookedKind::wavelike;
    return prob.ell * (p - 1.0) < prob.L ? HookedKind::wavelike : HookedKind::flatcore;
}

/// Total flat length of the n-th flat-core hooked curve before rescaling.
inline double hooked_flat_sum(PParam p, int n, double r) {
    const double pv = p.value();
    return (2.0 * n - 1.0) * (r - 1.0 / (pv - 1.0)) / (1.0 - r) * p_loop_half_length(p);
}

/// One member of the classification: the index n and either the modulus
/// (wavelike) or the loop signs and flat lengths (flat-core).
struct HookedBranch {
    HookedKind kind = HookedKind::wavelike;
    int n = 1;
    std::optional<Modulus> q;
    std::vector<Sign> signs;
    std::vector<double> flat_lengths;

    /// Canonical representative: the solved modulus, or equal flat lengths
    /// with the given signs (all + when empty).
    static HookedBranch canonical(const HookedProblem &prob, int n, std::vector<Sign> signs = {}) {
        if (n < 1) throw DomainError("hooked index n must be >= 1");
        HookedBranch b;
        b.kind = classify_branch(prob);
        b.n = n;
        if (b.kind == HookedKind::wavelike) {
            b.q = solve_modulus(prob.p, prob.ratio());
            return b;
        }
        if (signs.empty()) signs.assign(static_cast<std::size_t>(n), Sign::plus);
        if (signs.size() != static_cast<std::size_t>(n)) throw DomainError("flat-core hooked curves need n signs");
        b.signs = std::move(signs);
        const double sum = hooked_flat_sum(prob.p, n, prob.ratio());
        b.flat_lengths.assign(static_cast<std::size_t>(n), sum / n);
        return b;
    }

    void validate(const HookedProblem &prob) const {
        if (n < 1) throw DomainError("hooked index n must be >= 1");
        if (kind != classify_branch(prob)) throw DomainError("branch inconsistent with the hooked problem");
        if (kind == HookedKind::wavelike) {
            if (!q) throw DomainError("wavelike branch needs a modulus");
            const double Q = p_elliptic_ratio(prob.p, *q);
            if (std::abs(Q + prob.ratio()) > 1e-9) throw DomainError("modulus does not solve the wavelike relation");
            return;
        }
        if (signs.size() != static_cast<std::size_t>(n) || flat_lengths.size() != static_cast<std::size_t>(n))
            throw DomainError("flat-core hooked curves need n signs and n flat lengths");
        double sum = 0.0;
        for (double Lj : flat_lengths) {
            if (!(Lj >= 0.0) || !std::isfinite(Lj)) throw DomainError("flat lengths must be nonnegative");
            sum += Lj;
        }
        const double want = hooked_flat_sum(prob.p, n, prob.ratio());
        if (std::abs(sum - want) > 1e-9 * std::max(1.0, want)) throw DomainError("sum-flatparts violated");
    }
};

/// Dilation factor applied to the unit model curve.
inline double hooked_alpha(const HookedProblem &prob, const HookedBranch &b) {
    const double p = prob.p.value();
    if (b.kind == HookedKind::wavelike)
        return (2.0 * b.n - 1.0) * p_comp_ellint_1(prob.p, *b.q) / prob.L;
    return (2.0 * b.n - 1.0) * (p - 2.0) / (p - 1.0) * p_loop_half_length(prob.p) / (prob.L - prob.ell);
}

/// Builds the hooked curve of length L starting at the origin. M is the
/// number of sampling intervals per half-wave (wavelike) or half-loop.
inline ArcCurve build_hooked(const HookedProblem &prob, const HookedBranch &b, std::size_t M) {
    b.validate(prob);
    const double alpha = hooked_alpha(prob, b);
    ArcCurve model = [&] {
        if (b.kind == HookedKind::wavelike) {
            const double K = p_comp_ellint_1(prob.p, *b.q);
            return sample_wavelike(prob.p, *b.q, K, 2.0 * b.n * K, M * static_cast<std::size_t>(2 * b.n - 1));
        }
        std::vector<ArcCurve> pieces;
        for (int j = 0; j < b.n; ++j) {
            const double Lj = b.flat_lengths[static_cast<std::size_t>(j)];
            if (Lj > 0.0) pieces.push_back(sample_segment(prob.p, Lj, M));
            const Sign sg = b.signs[static_cast<std::size_t>(j)];
            if (j + 1 < b.n)
                pieces.push_back(sample_loop(prob.p, sg, 2 * M));
            else
                pieces.push_back(sample_loop(prob.p, sg, M, std::nullopt, 0.0));
        }
        return concat(pieces);
    }();

    PlanarTransform shift;
    shift.translation = Vec2{} - model.front().pos;
    PlanarTransform t;
    t.rotation = std::numbers::pi;
    t.scale = 1.0 / alpha;
    ArcCurve out = apply_transform(apply_transform(model, shift), t);
    std::string label = "hooked " + to_string(b.kind) + " n=" + std::to_string(b.n);
    if (b.kind == HookedKind::flatcore) label += " " + format_signs(b.signs);
    return ArcCurve(out.p(), out.samples(), out.breaks(), label, out.apexes());
}

enum class HookedEnd { terminal, initial };

struct BcReport {
    double k0 = 0.0;
    double kL = 0.0;
    double wprimeL = 0.0;
    bool pass = false;
};

/// Finite-difference check of k = 0 at the free end, k != 0 and w' = 0 at the
/// hooked end (w = |k|^(p-2) k). With `initial`, the roles of the ends swap.
inline BcReport verify_hooked_bc(const ArcCurve &curve, HookedEnd end = HookedEnd::terminal) {
    const double p = curve.p().value();
    const std::size_t n = curve.size();
    if (n < 3) throw DomainError("verify_hooked_bc needs at least three samples");
    auto w = [&](std::size_t i) {
        const double k = curve[i].kappa;
        return std::pow(std::abs(k), p - 2.0) * k;
    };
    BcReport r;
    if (end == HookedEnd::terminal) {
        r.k0 = curve.front().kappa;
        r.kL = curve.back().kappa;
        const double h = curve[n - 1].s - curve[n - 2].s;
        r.wprimeL = (3.0 * w(n - 1) - 4.0 * w(n - 2) + w(n - 3)) / (2.0 * h);
    } else {
        r.k0 = curve.back().kappa;
        r.kL = curve.front().kappa;
        const double h = curve[1].s - curve[0].s;
        r.wprimeL = (-3.0 * w(0) + 4.0 * w(1) - w(2)) / (2.0 * h);
    }
    const double kmax = curve.max_abs_kappa();
    const double tol = 1e-6 * kmax;
    const double scale = (p - 1.0) * std::pow(kmax, p - 1.0);
    r.pass = kmax > 0.0 && std::abs(r.k0) <= tol && std::abs(r.kL) >= 10.0 * tol && std::abs(r.wprimeL) <= tol * scale;
    return r;
}

/// Reverses the parametrization and reflects x -> -x, turning a hooked curve
/// into one with initial tangent -e1 and the same horizontal displacement.
inline ArcCurve mirror_hooked(const ArcCurve &curve) {
    const std::size_t n = curve.size();
    const double L = curve.length();
    const Vec2 end = curve.back().pos;
    std::vector<CurveSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CurveSample &c = curve[n - 1 - i];
        out[i].s = (i == 0) ? 0.0 : (i == n - 1 ? L : L - c.s);
        out[i].pos = {-(c.pos.x - end.x), c.pos.y - end.y};
        out[i].theta = -c.theta;
        out[i].kappa = c.kappa;
    }
    std::vector<std::size_t> breaks{0};
    for (auto it = curve.breaks().rbegin(); it != curve.breaks().rend(); ++it)
        if (*it != 0) breaks.push_back(n - 1 - *it);
    std::vector<double> apexes;
    for (auto it = curve.apexes().rbegin(); it != curve.apexes().rend(); ++it) apexes.push_back(L - *it);
    return ArcCurve(curve.p(), std::move(out), std::move(breaks), curve.construction() + " mirrored",
                    std::move(apexes));
}

/// C_p = 2^p K_p(1)^(p-1) E_{1,p}(1) ((p-2)/(p-1))^(p-1), p > 2.
inline double jensen_constant(PParam p) {
    detail::require_degenerate(p, "the Jensen constant");
    const double pv = p.value();
    const double K = p_loop_half_length(p);
    const double E = p_comp_ellint_2(p, Modulus(1.0));
    return std::pow(2.0, pv) * std::pow(K, pv - 1.0) * E * std::pow((pv - 2.0) / (pv - 1.0), pv - 1.0);
}

/// Lower bound C_p N^p / (L - ell)^(p-1) for N pieces of total length L and
/// horizontal extent ell.
inline double jensen_bound(PParam p, int N, double L, double ell) {
    if (N < 1) throw DomainError("jensen_bound requires N >= 1");
    if (!(ell > 0.0 && ell < L) || !std::isfinite(L)) throw DomainError("jensen_bound requires 0 < ell < L");
    const double pv = p.value();
    return jensen_constant(p) * std::pow(static_cast<double>(N), pv) / std::pow(L - ell, pv - 1.0);
}

/// Closed-form minimum of the p-bending energy over the hooked class.
inline double minimal_energy(const HookedProblem &prob) {
    const double p = prob.p.value();
    if (classify_branch(prob) == HookedKind::flatcore)
        return jensen_constant(prob.p) / std::pow(prob.L - prob.ell, p - 1.0);
    const Modulus q = solve_modulus(prob.p, prob.ratio());
    const double K = p_comp_ellint_1(prob.p, q);
    return std::pow(2.0 * q.value(), p) * std::pow(K, p - 1.0) * p_cn_power_integral(prob.p, q) /
           std::pow(prob.L, p - 1.0);
}

/// Closed-form energy of the n-th member: (2n - 1)^p times the minimum.
inline double hooked_energy(const HookedProblem &prob, int n) {
    if (n < 1) throw DomainError("hooked index n must be >= 1");
    return std::pow(2.0 * n - 1.0, prob.p.value()) * minimal_energy(prob);
}

}  // namespace pelastica
