#pragma once

// Turning-angle discretization of pinned curves, constrained descent of the
// discrete p-bending energy, and the stability probe built on top of it.

#include <pelastica/curves.hpp>
#include <pelastica/error.hpp>
#include <pelastica/hooked.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pelastica {

/// Unit-speed polygon with edge angles `thetas` and common edge length h.
struct DiscreteCurve {
    std::vector<double> thetas;
    double h;
    PParam p;

    DiscreteCurve(std::vector<double> t, double h_, PParam p_) : thetas(std::move(t)), h(h_), p(p_) {
        if (thetas.size() < 3) throw DomainError("DiscreteCurve needs M >= 3");
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("DiscreteCurve needs h > 0");
    }

    std::size_t M() const { return thetas.size(); }
    double length() const { return h * static_cast<double>(thetas.size()); }

    Vec2 displacement() const {
        Vec2 d;
        for (double t : thetas) d = d + Vec2{std::cos(t), std::sin(t)} * h;
        return d;
    }

    /// Vertices P_0 = 0, ..., P_M.
    std::vector<Vec2> vertices() const {
        std::vector<Vec2> v(thetas.size() + 1);
        for (std::size_t i = 0; i < thetas.size(); ++i) v[i + 1] = v[i] + Vec2{std::cos(thetas[i]), std::sin(thetas[i])} * h;
        return v;
    }

    /// kappa_i = (theta_{i+1} - theta_i) / h at interior vertex i + 1.
    std::vector<double> kappas() const {
        std::vector<double> k(thetas.size() - 1);
        for (std::size_t i = 0; i + 1 < thetas.size(); ++i) k[i] = (thetas[i + 1] - thetas[i]) / h;
        return k;
    }
};

struct PinnedConstraint {
    double dx;
    double dy;

    Vec2 vec() const { return {dx, dy}; }
};

/// Edge angles at the midpoints of M equal arclength cells, interpolated from
/// the samples by cubic Hermite interpolation with theta' = kappa.
inline DiscreteCurve discretize(const ArcCurve &curve, std::size_t M) {
    if (M < 3) throw DomainError("discretize needs M >= 3");
    const double L = curve.length();
    const double h = L / static_cast<double>(M);
    const auto &smp = curve.samples();
    std::vector<double> thetas(M);
    std::size_t j = 0;
    for (std::size_t i = 0; i < M; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * h;
        while (j + 2 < smp.size() && smp[j + 1].s <= s) ++j;
        const CurveSample &a = smp[j], &b = smp[j + 1];
        const double dt = b.s - a.s;
        const double u = (s - a.s) / dt;
        const double u2 = u * u, u3 = u2 * u;
        thetas[i] = (2 * u3 - 3 * u2 + 1) * a.theta + (u3 - 2 * u2 + u) * dt * a.kappa + (-2 * u3 + 3 * u2) * b.theta +
                    (u3 - u2) * dt * b.kappa;
    }
    return DiscreteCurve(std::move(thetas), h, curve.p());
}

struct EnergyGrad {
    double E;
    std::vector<double> grad;
};

/// E_h = h sum |kappa_i|^p and its gradient p (w_{j-1} - w_j), w = |kappa|^(p-2) kappa.
inline EnergyGrad discrete_energy_grad(const DiscreteCurve &dc) {
    const double p = dc.p.value();
    const std::size_t M = dc.M();
    EnergyGrad out{0.0, std::vector<double>(M, 0.0)};
    for (std::size_t i = 0; i + 1 < M; ++i) {
        const double k = (dc.thetas[i + 1] - dc.thetas[i]) / dc.h;
        const double ak = std::abs(k);
        if (ak == 0.0) continue;
        const double akp2 = std::pow(ak, p - 2.0);
        out.E += dc.h * akp2 * ak * ak;
        const double w = akp2 * k;
        out.grad[i] -= p * w;
        out.grad[i + 1] += p * w;
    }
    return out;
}

inline double discrete_energy(const DiscreteCurve &dc) {
    const double p = dc.p.value();
    double E = 0.0;
    for (std::size_t i = 0; i + 1 < dc.M(); ++i) E += std::pow(std::abs(dc.thetas[i + 1] - dc.thetas[i]) / dc.h, p);
    return E * dc.h;
}

/// Euclidean norm of the displacement mismatch.
inline double feasibility_residual(const DiscreteCurve &dc, const PinnedConstraint &c) {
    return (dc.displacement() - c.vec()).norm();
}

namespace detail {

inline double feasibility_target(const DiscreteCurve &dc) { return 1e-12 * std::max(1.0, dc.length()); }

// Solves [a b; b d] x = r with a small Tikhonov shift.
inline std::array<double, 2> solve_sym2(double a, double b, double d, std::array<double, 2> r) {
    const double shift = 1e-14 * (std::abs(a) + std::abs(d));
    a += shift;
    d += shift;
    const double det = a * d - b * b;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw NumericalError("singular constraint Jacobian", det, 0.0);
    return {(d * r[0] - b * r[1]) / det, (a * r[1] - b * r[0]) / det};
}

// Thomas algorithm for a symmetric tridiagonal system (diag, off) x = r.
inline std::vector<double> solve_tridiagonal(const std::vector<double> &diag, const std::vector<double> &off,
                                             std::vector<double> r) {
    const std::size_t n = diag.size();
    std::vector<double> c(n, 0.0);
    double denom = diag[0];
    c[0] = n > 1 ? off[0] / denom : 0.0;
    r[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if (i + 1 < n) c[i] = off[i] / denom;
        r[i] = (r[i] - off[i - 1] * r[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) r[i] -= c[i] * r[i + 1];
    return r;
}

// Component of g orthogonal to the constraint normals (-h sin, h cos).
inline std::vector<double> tangent_projection(const DiscreteCurve &dc, const std::vector<double> &g) {
    double a = 0, b = 0, d = 0, r0 = 0, r1 = 0;
    for (std::size_t i = 0; i < dc.M(); ++i) {
        const double sx = -std::sin(dc.thetas[i]), cy = std::cos(dc.thetas[i]);
        a += sx * sx;
        b += sx * cy;
        d += cy * cy;
        r0 += sx * g[i];
        r1 += cy * g[i];
    }
    const auto mu = solve_sym2(a, b, d, {r0, r1});
    std::vector<double> out(g);
    for (std::size_t i = 0; i < dc.M(); ++i)
        out[i] -= mu[0] * -std::sin(dc.thetas[i]) + mu[1] * std::cos(dc.thetas[i]);
    return out;
}

inline double sup_norm(const std::vector<double> &v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

/// Gauss-Newton projection onto the pinned constraint:
/// theta <- theta - J^T (J J^T)^{-1} g(theta), a least-squares correction.
inline DiscreteCurve project_constraints(const DiscreteCurve &dc, const PinnedConstraint &c) {
    if (!(c.vec().norm() < dc.length())) throw DomainError("pinned displacement must be shorter than the curve");
    const double target = detail::feasibility_target(dc);
    if (feasibility_residual(dc, c) <= target) return dc;
    DiscreteCurve out = dc;
    const double h = dc.h;
    for (int it = 0; it < 50; ++it) {
        double a = 0, b = 0, d = 0;
        Vec2 disp;
        for (double t : out.thetas) {
            const double s = std::sin(t), co = std::cos(t);
            disp = disp + Vec2{co, s} * h;
            a += h * h * s * s;
            b -= h * h * s * co;
            d += h * h * co * co;
        }
        const Vec2 res = disp - c.vec();
        if (res.norm() <= target) return out;
        const auto mu = detail::solve_sym2(a, b, d, {res.x, res.y});
        for (double &t : out.thetas) t -= -h * std::sin(t) * mu[0] + h * std::cos(t) * mu[1];
    }
    const double r = feasibility_residual(out, c);
    if (r <= target) return out;
    throw NumericalError("constraint projection did not converge in 50 iterations", r, target);
}

/// Adds a random combination of the first 10 sine and cosine modes with sup
/// norm eps, then restores the curve's own displacement.
inline DiscreteCurve perturb(const DiscreteCurve &dc, double eps, std::uint64_t seed) {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw DomainError("perturbation size must be nonnegative");
    if (eps == 0.0) return dc;
    const PinnedConstraint c{dc.displacement().x, dc.displacement().y};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::array<double, 10> as{}, bs{};
    for (int m = 0; m < 10; ++m) {
        as[static_cast<std::size_t>(m)] = coef(rng);
        bs[static_cast<std::size_t>(m)] = coef(rng);
    }
    const std::size_t M = dc.M();
    std::vector<double> delta(M, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double x = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(M);
        for (int m = 0; m < 10; ++m)
            delta[i] += as[static_cast<std::size_t>(m)] * std::sin((m + 1) * x) +
                        bs[static_cast<std::size_t>(m)] * std::cos((m + 1) * x);
    }
    const double scale = eps / detail::sup_norm(delta);
    DiscreteCurve out = dc;
    for (std::size_t i = 0; i < M; ++i) out.thetas[i] += scale * delta[i];
    return project_constraints(out, c);
}

struct DescentOptions {
    int max_iter = 2000;
    double gtol = 1e-6;
    double armijo = 1e-4;
    int max_halvings = 20;
    double shift_initial = 1e-2;
    double shift_floor = 1e-10;
};

struct DescentResult {
    DiscreteCurve curve;
    double E_final;
    int iterations;
    bool converged;
    bool line_search_failed;
};

/// Observer called with each accepted iterate and its energy.
using DescentObserver = std::function<void(const DiscreteCurve &, double)>;

namespace detail {

// LDL^T factorization of a symmetric tridiagonal matrix; fails unless every
// pivot is positive.
struct TridiagonalLdl {
    std::vector<double> d, l;

    bool factor(const std::vector<double> &diag, const std::vector<double> &off) {
        const std::size_t n = diag.size();
        d.assign(n, 0.0);
        l.assign(n, 0.0);
        d[0] = diag[0];
        if (!(d[0] > 0.0)) return false;
        for (std::size_t i = 1; i < n; ++i) {
            l[i] = off[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i] * off[i - 1];
            if (!(d[i] > 0.0) || !std::isfinite(d[i])) return false;
        }
        return true;
    }

    std::vector<double> solve(std::vector<double> r) const {
        const std::size_t n = d.size();
        for (std::size_t i = 1; i < n; ++i) r[i] -= l[i] * r[i - 1];
        for (std::size_t i = 0; i < n; ++i) r[i] /= d[i];
        for (std::size_t i = n - 1; i-- > 0;) r[i] -= l[i + 1] * r[i + 1];
        return r;
    }
};

}  // namespace detail

/// Constrained descent of E_h.
///
/// Each search direction minimizes g.d + d.H d / 2 over the linearized
/// constraint, where H is the (tridiagonal) Hessian of the Lagrangian with
/// least-squares multipliers, shifted by tau I until it is positive definite.
/// tau starts at shift_initial times the largest diagonal entry and shrinks
/// by 4 per step down to shift_floor times it. The trial point theta + t d is
/// reprojected and accepted by Armijo backtracking from t = 1. Stops when the
/// projected gradient sup norm is at most gtol, after max_iter steps, or when
/// backtracking fails at the floor shift (flagged).
inline DescentResult descend(const DiscreteCurve &start, const PinnedConstraint &c, const DescentOptions &opt = {},
                             const DescentObserver &observer = {}) {
    if (opt.max_iter < 0 || !(opt.gtol > 0.0)) throw DomainError("descent options out of range");
    const double p = start.p.value();
    const std::size_t M = start.M();
    const double h = start.h;
    DiscreteCurve cur = project_constraints(start, c);
    EnergyGrad eg = discrete_energy_grad(cur);
    double tau = 0.0;
    int it = 0;
    bool failed = false;
    for (; it < opt.max_iter; ++it) {
        const std::vector<double> pg = detail::tangent_projection(cur, eg.grad);
        if (detail::sup_norm(pg) <= opt.gtol) break;

        std::vector<double> n1(M), n2(M);
        double a11 = 0, a12 = 0, a22 = 0, r1 = 0, r2 = 0;
        for (std::size_t i = 0; i < M; ++i) {
            n1[i] = -h * std::sin(cur.thetas[i]);
            n2[i] = h * std::cos(cur.thetas[i]);
            a11 += n1[i] * n1[i];
            a12 += n1[i] * n2[i];
            a22 += n2[i] * n2[i];
            r1 += n1[i] * eg.grad[i];
            r2 += n2[i] * eg.grad[i];
        }
        const auto mult = detail::solve_sym2(a11, a12, a22, {r1, r2});

        std::vector<double> diag(M, 0.0), off(M - 1, 0.0);
        double scale = 0.0;
        for (std::size_t i = 0; i + 1 < M; ++i) {
            const double k = std::abs(cur.thetas[i + 1] - cur.thetas[i]) / h;
            const double a = std::min(p * (p - 1.0) * std::pow(k, p - 2.0) / h, 1e300);
            diag[i] += a;
            diag[i + 1] += a;
            off[i] = -a;
        }
        for (std::size_t i = 0; i < M; ++i) {
            diag[i] += h * (mult[0] * std::cos(cur.thetas[i]) + mult[1] * std::sin(cur.thetas[i]));
            scale = std::max(scale, std::abs(diag[i]));
        }
        if (!(scale > 0.0)) scale = 1.0;
        const double tau_min = opt.shift_floor * scale;
        tau = it == 0 ? std::max(opt.shift_initial * scale, tau_min) : std::max(tau / 4.0, tau_min);
        detail::TridiagonalLdl ldl;
        std::vector<double> shifted(M);
        for (int k = 0;; ++k) {
            for (std::size_t i = 0; i < M; ++i) shifted[i] = diag[i] + tau;
            if (ldl.factor(shifted, off)) break;
            if (k > 200) throw NumericalError("descent: cannot regularize the Hessian", eg.E, tau);
            tau *= 4.0;
        }

        // d = -H^{-1}(g + J^T nu) with J d = -(constraint residual).
        const auto Hg = ldl.solve(eg.grad);
        const auto H1 = ldl.solve(n1);
        const auto H2 = ldl.solve(n2);
        double b11 = 0, b12 = 0, b22 = 0, s1 = 0, s2 = 0;
        for (std::size_t i = 0; i < M; ++i) {
            b11 += n1[i] * H1[i];
            b12 += n1[i] * H2[i];
            b22 += n2[i] * H2[i];
            s1 += n1[i] * Hg[i];
            s2 += n2[i] * Hg[i];
        }
        const Vec2 res = cur.displacement() - c.vec();
        const auto nu = detail::solve_sym2(b11, b12, b22, {res.x - s1, res.y - s2});
        std::vector<double> d(M);
        double slope = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            d[i] = -(Hg[i] + nu[0] * H1[i] + nu[1] * H2[i]);
            slope += eg.grad[i] * d[i];
        }
        if (!(slope < 0.0))
            for (std::size_t i = 0; i < M; ++i) d[i] = -pg[i] / (scale + tau);

        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
            DiscreteCurve trial = cur;
            for (std::size_t i = 0; i < M; ++i) trial.thetas[i] += t * d[i];
            try {
                trial = project_constraints(trial, c);
            } catch (const NumericalError &) {
                continue;
            }
            double decrease = 0.0;
            for (std::size_t i = 0; i < M; ++i) decrease += eg.grad[i] * (trial.thetas[i] - cur.thetas[i]);
            EnergyGrad teg = discrete_energy_grad(trial);
            if (teg.E <= eg.E + opt.armijo * std::min(decrease, 0.0) && teg.E <= eg.E) {
                cur = std::move(trial);
                eg = std::move(teg);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (tau > tau_min) {
                tau = 0.0;
                continue;
            }
            failed = true;
            break;
        }
        if (t < 0.25) tau *= 4.0;
        if (observer) observer(cur, eg.E);
    }
    const bool converged = !failed && detail::sup_norm(detail::tangent_projection(cur, eg.grad)) <= opt.gtol;
    return {std::move(cur), eg.E, it, converged, failed};
}

// ---------------------------------------------------------------------------
// Apex and midpoint partition.

struct PartitionPiece {
    std::size_t first_edge;
    std::size_t end_edge;  // exclusive
    double L;
    double ell;
    double energy;
};

struct PartitionReport {
    std::vector<std::size_t> cuts;  // vertex indices of the interior cuts
    std::vector<PartitionPiece> pieces;
    double energy_sum = 0.0;
    double bound = 0.0;
    bool ratios_ok = false;
    bool bound_ok = false;
};

/// Cuts an N-loop configuration at its loop apexes (edges whose tangent is
/// closest to the reverse chord direction) and at the midpoints between
/// neighbouring apexes, giving 2N pieces. Checks 1/(p-1) L_i < ell_i < L_i
/// per piece and sum of piece energies >= jensen_bound(p, 2N, L, ell) - tol
/// (tol defaults to 1e-3 times the energy).
inline PartitionReport partition_and_bound(const DiscreteCurve &dc, int N, std::optional<double> tol = std::nullopt,
                                           double window_delta = 0.05) {
    if (N < 1) throw DomainError("partition needs N >= 1");
    const double p = dc.p.value();
    const std::size_t M = dc.M();
    const Vec2 disp = dc.displacement();
    const double chord = disp.norm();
    if (!(chord > 0.0)) throw DomainError("partition unavailable: zero chord");
    const Vec2 u = disp * (1.0 / chord);
    const double theta_chord = std::atan2(u.y, u.x);

    // Runs of edges whose tangent lies within the window around -u.
    std::vector<std::size_t> apexes;
    std::size_t i = 0;
    auto closeness = [&](std::size_t j) { return std::cos(dc.thetas[j] - theta_chord) + 1.0; };
    while (i < M) {
        if (closeness(i) < window_delta) {
            std::size_t best = i;
            while (i < M && closeness(i) < window_delta) {
                if (closeness(i) < closeness(best)) best = i;
                ++i;
            }
            apexes.push_back(best);
        } else {
            ++i;
        }
    }
    if (apexes.size() != static_cast<std::size_t>(N)) throw DomainError("partition unavailable");

    PartitionReport rep;
    // Vertex cuts: apex edge a starts at vertex a; midpoint between apexes.
    for (int j = 0; j < N; ++j) {
        if (j > 0) rep.cuts.push_back((apexes[static_cast<std::size_t>(j - 1)] + apexes[static_cast<std::size_t>(j)] + 1) / 2);
        rep.cuts.push_back(apexes[static_cast<std::size_t>(j)]);
    }
    for (std::size_t c : rep.cuts)
        if (c == 0 || c >= M) throw DomainError("partition unavailable");

    const auto verts = dc.vertices();
    std::vector<std::size_t> bounds{0};
    bounds.insert(bounds.end(), rep.cuts.begin(), rep.cuts.end());
    bounds.push_back(M);
    rep.ratios_ok = true;
    double Ltot = 0.0, elltot = 0.0;
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        PartitionPiece piece{bounds[k], bounds[k + 1], 0.0, 0.0, 0.0};
        piece.L = dc.h * static_cast<double>(piece.end_edge - piece.first_edge);
        piece.ell = (verts[piece.end_edge] - verts[piece.first_edge]).dot(u);
        auto term = [&](std::size_t e) { return dc.h * std::pow(std::abs(dc.thetas[e + 1] - dc.thetas[e]) / dc.h, p); };
        for (std::size_t e = piece.first_edge; e + 1 < piece.end_edge; ++e) piece.energy += term(e);
        // Cut vertices are shared: half of their term goes to each side.
        if (piece.first_edge > 0) piece.energy += 0.5 * term(piece.first_edge - 1);
        if (piece.end_edge < M) piece.energy += 0.5 * term(piece.end_edge - 1);
        if (!(piece.L / (p - 1.0) < piece.ell && piece.ell < piece.L)) rep.ratios_ok = false;
        rep.energy_sum += piece.energy;
        Ltot += piece.L;
        elltot += piece.ell;
        rep.pieces.push_back(piece);
    }
    rep.bound = jensen_bound(dc.p, 2 * N, Ltot, elltot);
    const double t = tol.value_or(1e-3 * discrete_energy(dc));
    rep.bound_ok = rep.ratios_ok && rep.energy_sum >= rep.bound - t;
    return rep;
}

// ---------------------------------------------------------------------------
// Stability probe.

enum class Verdict { stable_consistent, instability_witness, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::stable_consistent: return "stable-consistent";
    case Verdict::instability_witness: return "instability-witness";
    default: return "inconclusive";
    }
}

struct ProbeOptions {
    std::size_t M_per_piece = 1000;
    DescentOptions descent;
    std::uint64_t base_seed = 0;
    double tol_E_rel = 1e-3;
    double margin = 0.05;
    double dev_cap = 0.1;
    bool check_partition = true;
    bool record_trajectory = false;
    bool parallel = true;
};

struct SeedOutcome {
    std::uint64_t seed = 0;
    double E_start = 0.0;
    double E_final = 0.0;
    double sup_dev = 0.0;
    int iterations = 0;
    bool converged = false;
    int partition_checks = 0;
    int bound_failures = 0;
    double min_bound_slack = std::numeric_limits<double>::infinity();
    std::vector<double> trajectory;
};

struct ProbeReport {
    double p = 0.0;
    std::string signs;
    std::vector<double> flat_lengths;
    std::size_t M = 0;
    double eps = 0.0;
    double E_closed_form = 0.0;
    double E_ref = 0.0;
    bool reference_converged = false;
    std::vector<SeedOutcome> seeds;
    Verdict verdict = Verdict::inconclusive;
};

/// Reference state of the probe: the discretized, projected and relaxed curve.
struct ProbeReference {
    DiscreteCurve curve;
    PinnedConstraint constraint;
    double E;
    bool converged;
};

inline ProbeReference probe_reference(const FlatCoreSpec &spec, std::size_t M, const ProbeOptions &opt = {}) {
    spec.validate();
    const ArcCurve curve = build_flat_core(spec, opt.M_per_piece);
    const Vec2 d = curve.displacement();
    const PinnedConstraint c{d.x, d.y};
    const DescentResult rel = descend(discretize(curve, M), c, opt.descent);
    return {rel.curve, c, rel.E_final, rel.converged};
}

inline SeedOutcome probe_seed(const ProbeReference &ref, int N, double eps, std::uint64_t seed,
                              const ProbeOptions &opt) {
    SeedOutcome out;
    out.seed = seed;
    const DiscreteCurve start = perturb(ref.curve, eps, seed);
    out.E_start = discrete_energy(start);
    const double tol = opt.tol_E_rel * ref.E;
    if (opt.record_trajectory) out.trajectory.push_back(out.E_start);
    DescentObserver obs;
    if (opt.check_partition || opt.record_trajectory) {
        obs = [&](const DiscreteCurve &dc, double E) {
            if (opt.record_trajectory) out.trajectory.push_back(E);
            if (!opt.check_partition) return;
            try {
                const PartitionReport r = partition_and_bound(dc, N, tol);
                ++out.partition_checks;
                if (!r.bound_ok) ++out.bound_failures;
                out.min_bound_slack = std::min(out.min_bound_slack, r.energy_sum - r.bound);
            } catch (const DomainError &) {
            }
        };
    }
    const DescentResult res = descend(start, ref.constraint, opt.descent, obs);
    out.E_final = res.E_final;
    out.iterations = res.iterations;
    out.converged = res.converged;
    for (std::size_t i = 0; i < ref.curve.M(); ++i)
        out.sup_dev = std::max(out.sup_dev, std::abs(res.curve.thetas[i] - ref.curve.thetas[i]));
    return out;
}

inline Verdict judge(const ProbeReport &r, const ProbeOptions &opt) {
    bool stable = true, witness = false;
    for (const SeedOutcome &s : r.seeds) {
        if (s.E_final < r.E_ref - opt.tol_E_rel * r.E_ref || s.sup_dev > opt.dev_cap) stable = false;
        if (s.E_final <= r.E_ref * (1.0 - opt.margin)) witness = true;
    }
    if (witness) return Verdict::instability_witness;
    return stable ? Verdict::stable_consistent : Verdict::inconclusive;
}

/// Builds the flat-core curve, relaxes its discretization to get E_ref, then
/// perturbs and relaxes once per seed (seeds base_seed, base_seed + 1, ...).
inline ProbeReport probe_stability(const FlatCoreSpec &spec, double eps, int n_seeds, std::size_t M,
                                   const ProbeOptions &opt = {}) {
    if (n_seeds < 1) throw DomainError("probe needs at least one seed");
    const ProbeReference ref = probe_reference(spec, M, opt);
    ProbeReport rep;
    rep.p = spec.p.value();
    rep.signs = format_signs(spec.signs);
    rep.flat_lengths = spec.flat_lengths;
    rep.M = M;
    rep.eps = eps;
    rep.E_ref = ref.E;
    rep.reference_converged = ref.converged;
    const double Lbar = spec.total_length();
    const double chord = ref.constraint.vec().norm();
    rep.E_closed_form = jensen_bound(spec.p, 2 * static_cast<int>(spec.N()), Lbar, chord);
    const int N = static_cast<int>(spec.N());
    rep.seeds.resize(static_cast<std::size_t>(n_seeds));
    if (opt.parallel) {
        std::vector<std::future<SeedOutcome>> jobs;
        for (int i = 0; i < n_seeds; ++i)
            jobs.push_back(std::async(std::launch::async, [&, i] {
                return probe_seed(ref, N, eps, opt.base_seed + static_cast<std::uint64_t>(i), opt);
            }));
        for (int i = 0; i < n_seeds; ++i) rep.seeds[static_cast<std::size_t>(i)] = jobs[static_cast<std::size_t>(i)].get();
    } else {
        for (int i = 0; i < n_seeds; ++i)
            rep.seeds[static_cast<std::size_t>(i)] = probe_seed(ref, N, eps, opt.base_seed + static_cast<std::uint64_t>(i), opt);
    }
    rep.verdict = judge(rep, opt);
    return rep;
}

}  // namespace pelastica
