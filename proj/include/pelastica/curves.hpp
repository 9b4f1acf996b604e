#pragma once

// Arclength-sampled planar curves: the classified p-elasticae with vanishing
// curvature (segments, wavelike curves, loops and their concatenations), the
// p-bending energy, and Euler-Lagrange consistency checks.

#include <pelastica/error.hpp>
#include <pelastica/numerics.hpp>
#include <pelastica/pelliptic.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pelastica {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {x * c, y * c}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct CurveSample {
    double s = 0.0;
    Vec2 pos;
    double theta = 0.0;
    double kappa = 0.0;
};

enum class Sign { plus, minus };

inline double sign_value(Sign s) { return s == Sign::plus ? 1.0 : -1.0; }
inline Sign flip(Sign s) { return s == Sign::plus ? Sign::minus : Sign::plus; }

/// Parses a string such as "+-+" into signs.
inline std::vector<Sign> parse_signs(std::string_view text) {
    std::vector<Sign> out;
    for (char c : text) {
        if (c == '+')
            out.push_back(Sign::plus);
        else if (c == '-')
            out.push_back(Sign::minus);
        else
            throw DomainError("signs must consist of '+' and '-'");
    }
    return out;
}

inline std::string format_signs(const std::vector<Sign> &signs) {
    std::string out;
    for (Sign s : signs) out.push_back(s == Sign::plus ? '+' : '-');
    return out;
}

/// A planar curve sampled in arclength.
///
/// Pieces are runs of uniformly spaced samples; `breaks()` lists the index at
/// which each piece starts, and consecutive pieces share their junction sample.
/// `apexes()` records the arclength of every loop midpoint known from the
/// construction.
class ArcCurve {
public:
    ArcCurve(PParam p, std::vector<CurveSample> samples, std::vector<std::size_t> breaks = {},
             std::string construction = {}, std::vector<double> apexes = {})
        : p_(p), samples_(std::move(samples)), breaks_(std::move(breaks)),
          construction_(std::move(construction)), apexes_(std::move(apexes)) {
        if (samples_.size() < 2) throw DomainError("ArcCurve needs at least two samples");
        if (samples_.front().s != 0.0) throw DomainError("ArcCurve must start at s = 0");
        for (std::size_t i = 1; i < samples_.size(); ++i)
            if (!(samples_[i].s > samples_[i - 1].s))
                throw DomainError("ArcCurve arclength must be strictly increasing");
        if (breaks_.empty() || breaks_.front() != 0) breaks_.insert(breaks_.begin(), 0);
        for (std::size_t i = 1; i < breaks_.size(); ++i)
            if (breaks_[i] <= breaks_[i - 1] || breaks_[i] >= samples_.size() - 1)
                throw DomainError("ArcCurve piece breaks are malformed");
    }

    PParam p() const { return p_; }
    double length() const { return samples_.back().s; }
    const std::vector<CurveSample> &samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    const CurveSample &operator[](std::size_t i) const { return samples_[i]; }
    const CurveSample &front() const { return samples_.front(); }
    const CurveSample &back() const { return samples_.back(); }
    const std::vector<std::size_t> &breaks() const { return breaks_; }
    const std::string &construction() const { return construction_; }
    const std::vector<double> &apexes() const { return apexes_; }

    std::size_t piece_count() const { return breaks_.size(); }
    /// Half-open sample range [first, last] (inclusive) of piece i.
    std::pair<std::size_t, std::size_t> piece(std::size_t i) const {
        const std::size_t first = breaks_[i];
        const std::size_t last = (i + 1 < breaks_.size()) ? breaks_[i + 1] : samples_.size() - 1;
        return {first, last};
    }

    Vec2 displacement() const { return samples_.back().pos - samples_.front().pos; }
    double max_abs_kappa() const {
        double m = 0.0;
        for (const auto &s : samples_) m = std::max(m, std::abs(s.kappa));
        return m;
    }

private:
    PParam p_;
    std::vector<CurveSample> samples_;
    std::vector<std::size_t> breaks_;
    std::string construction_;
    std::vector<double> apexes_;
};

/// Similarity transform x -> scale * R(rotation) * Reflect(x) + translation,
/// with Reflect the vertical reflection (x, y) -> (x, -y) when enabled.
struct PlanarTransform {
    double rotation = 0.0;
    bool reflect = false;
    double scale = 1.0;
    Vec2 translation;
};

namespace detail {

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t intervals) {
    std::vector<double> s(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i)
        s[i] = (i == intervals) ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(intervals);
    return s;
}

inline void require_intervals(std::size_t M) {
    if (M < 2) throw DomainError("sampling needs M >= 2");
}

}  // namespace detail

/// Samples the wavelike p-elastica with modulus q on [s_lo, s_hi] using M
/// uniform intervals. The returned arclength is measured from s_lo.
inline ArcCurve sample_wavelike(PParam p, Modulus q, double s_lo, double s_hi, std::size_t M) {
    const double qv = q.value();
    if (!(qv > 0.0 && qv < 1.0)) throw DomainError("wavelike curves require q in (0, 1)");
    if (!(s_hi > s_lo)) throw DomainError("sample_wavelike requires s_lo < s_hi");
    detail::require_intervals(M);
    const PElliptic fam(p, q);
    const double pv = p.value();
    const double height = qv * pv / (pv - 1.0);

    std::vector<CurveSample> out;
    out.reserve(M + 1);
    for (double s : detail::uniform_grid(s_lo, s_hi, M)) {
        const Amplitude am = fam.am(s);
        const double cn = fam.cn_of(am);
        CurveSample c;
        c.s = s - s_lo;
        c.pos = {2.0 * fam.E_inc(am) - s, -height * std::pow(std::abs(cn), pv - 2.0) * cn};
        c.theta = 2.0 * std::asin(qv * am.sin());
        c.kappa = 2.0 * qv * cn;
        out.push_back(c);
    }
    out.front().s = 0.0;
    return ArcCurve(p, std::move(out), {}, "wavelike");
}

/// Samples the loop p-elastica of the given sign on [s_lo, s_hi], a
/// subinterval of [-K_p(1), K_p(1)] (default: the whole loop), with M intervals.
inline ArcCurve sample_loop(PParam p, Sign sign, std::size_t M, std::optional<double> s_lo = std::nullopt,
                            std::optional<double> s_hi = std::nullopt) {
    detail::require_degenerate(p, "the loop p-elastica");
    detail::require_intervals(M);
    const PElliptic fam(p, Modulus(1.0));
    const double K = fam.K();
    const double lo = s_lo.value_or(-K), hi = s_hi.value_or(K);
    if (!(lo >= -K && hi <= K && lo < hi)) throw DomainError("sample_loop range must lie inside [-K, K]");
    const double pv = p.value();
    const double sg = sign_value(sign);
    const double height = pv / (pv - 1.0);

    std::vector<CurveSample> out;
    out.reserve(M + 1);
    for (double s : detail::uniform_grid(lo, hi, M)) {
        const Amplitude am = fam.am(s);
        const double sech = fam.cn_of(am);
        CurveSample c;
        c.s = s - lo;
        c.pos = {2.0 * p_tanh(p, s) - s, -sg * height * std::pow(sech, pv - 1.0)};
        c.theta = 2.0 * sg * am.value();
        c.kappa = 2.0 * sg * sech;
        out.push_back(c);
    }
    out.front().s = 0.0;
    std::vector<double> apexes;
    if (lo <= 0.0 && 0.0 <= hi) apexes.push_back(-lo);
    return ArcCurve(p, std::move(out), {}, sign == Sign::plus ? "loop+" : "loop-", std::move(apexes));
}

/// Straight piece s -> (-s, 0) of length L.
inline ArcCurve sample_segment(PParam p, double L, std::size_t M) {
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("segment length must be positive");
    detail::require_intervals(M);
    std::vector<CurveSample> out;
    out.reserve(M + 1);
    for (double s : detail::uniform_grid(0.0, L, M)) out.push_back({s, {-s, 0.0}, std::numbers::pi, 0.0});
    return ArcCurve(p, std::move(out), {}, "segment");
}

/// Arclength concatenation: each piece is translated to start where the
/// previous one ends, and its angle shifted by a multiple of 2 pi so theta
/// stays continuous. At junctions the left piece's sample is kept.
inline ArcCurve concat(const std::vector<ArcCurve> &curves) {
    if (curves.empty()) throw DomainError("concat needs at least one curve");
    const double p = curves.front().p().value();
    std::vector<CurveSample> out;
    std::vector<std::size_t> breaks;
    std::vector<double> apexes;
    std::string label;
    for (const ArcCurve &c : curves) {
        if (c.p().value() != p) throw DomainError("concat requires equal p");
        if (!label.empty()) label += "+";
        label += c.construction();
        if (out.empty()) {
            for (std::size_t i = 0; i < c.piece_count(); ++i) breaks.push_back(c.breaks()[i]);
            out = c.samples();
            apexes = c.apexes();
            continue;
        }
        const CurveSample &last = out.back();
        const Vec2 shift = last.pos - c.front().pos;
        const double turns = std::nearbyint((last.theta - c.front().theta) / (2.0 * std::numbers::pi));
        const double dtheta = turns * 2.0 * std::numbers::pi;
        const double s0 = last.s;
        const std::size_t base = out.size() - 1;
        for (std::size_t i = 0; i < c.piece_count(); ++i) breaks.push_back(base + c.breaks()[i]);
        for (std::size_t i = 1; i < c.size(); ++i) {
            CurveSample smp = c[i];
            smp.s += s0;
            smp.pos = smp.pos + shift;
            smp.theta += dtheta;
            out.push_back(smp);
        }
        for (double a : c.apexes()) apexes.push_back(a + s0);
    }
    return ArcCurve(curves.front().p(), std::move(out), std::move(breaks), label, std::move(apexes));
}

inline ArcCurve apply_transform(const ArcCurve &curve, const PlanarTransform &t) {
    if (!(t.scale > 0.0)) throw DomainError("PlanarTransform scale must be positive");
    const double cr = std::cos(t.rotation), sr = std::sin(t.rotation);
    const double refl = t.reflect ? -1.0 : 1.0;
    std::vector<CurveSample> out = curve.samples();
    for (CurveSample &c : out) {
        const Vec2 v{c.pos.x, refl * c.pos.y};
        c.pos = Vec2{cr * v.x - sr * v.y, sr * v.x + cr * v.y} * t.scale + t.translation;
        c.theta = refl * c.theta + t.rotation;
        c.kappa = refl * c.kappa / t.scale;
        c.s *= t.scale;
    }
    std::vector<double> apexes = curve.apexes();
    for (double &a : apexes) a *= t.scale;
    return ArcCurve(curve.p(), std::move(out), curve.breaks(), curve.construction(), std::move(apexes));
}

/// Builds a curve from curvature samples on an increasing arclength grid,
/// integrating theta and position with the trapezoid rule.
inline ArcCurve curve_from_curvature(PParam p, const std::vector<double> &s, const std::vector<double> &kappa,
                                     double theta0 = 0.0, Vec2 start = {}) {
    if (s.size() != kappa.size() || s.size() < 2) throw DomainError("curve_from_curvature: bad grid");
    std::vector<CurveSample> out(s.size());
    out[0] = {0.0, start, theta0, kappa[0]};
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double h = s[i] - s[i - 1];
        out[i].s = s[i] - s[0];
        out[i].kappa = kappa[i];
        out[i].theta = out[i - 1].theta + 0.5 * h * (kappa[i - 1] + kappa[i]);
        // Exact for piecewise-linear theta.
        const double a = out[i - 1].theta, b = out[i].theta;
        Vec2 step;
        if (std::abs(b - a) < 1e-8) {
            const double m = 0.5 * (a + b);
            step = {std::cos(m), std::sin(m)};
        } else {
            step = Vec2{std::sin(b) - std::sin(a), std::cos(a) - std::cos(b)} * (1.0 / (b - a));
        }
        out[i].pos = out[i - 1].pos + step * h;
    }
    return ArcCurve(p, std::move(out), {}, "from-curvature");
}

// ---------------------------------------------------------------------------
// Flat-core pinned p-elasticae.

/// Parameters of a flat-core pinned p-elastica: N loops with signs, N + 1
/// straight pieces, and the chord ratio r = |P1 - P0| / L.
struct FlatCoreSpec {
    PParam p;
    std::vector<Sign> signs;
    std::vector<double> flat_lengths;
    double r;

    std::size_t N() const { return signs.size(); }

    /// Segments and loops strictly alternate (no loop touches an endpoint).
    bool alternating() const {
        return std::all_of(flat_lengths.begin(), flat_lengths.end(), [](double L) { return L > 0.0; });
    }

    /// Total straight length forced by the chord ratio.
    static double required_flat_sum(PParam p, std::size_t N, double r) {
        const double pv = p.value();
        return 2.0 * static_cast<double>(N) * (r - 1.0 / (pv - 1.0)) / (1.0 - r) * p_loop_half_length(p);
    }

    double total_length() const {
        return 2.0 * static_cast<double>(N()) * p_loop_half_length(p) +
               std::accumulate(flat_lengths.begin(), flat_lengths.end(), 0.0);
    }

    void validate() const {
        const double pv = p.value();
        if (!(pv > 2.0)) throw DomainError("flat-core curves require p > 2");
        if (signs.empty()) throw DomainError("flat-core curves need N >= 1");
        if (flat_lengths.size() != signs.size() + 1) throw DomainError("flat-core curves need N + 1 flat lengths");
        for (double L : flat_lengths)
            if (!(L >= 0.0) || !std::isfinite(L)) throw DomainError("flat lengths must be nonnegative");
        if (!(r >= 1.0 / (pv - 1.0) && r < 1.0)) throw DomainError("flat-core ratio r must lie in [1/(p-1), 1)");
        const double want = required_flat_sum(p, N(), r);
        const double have = std::accumulate(flat_lengths.begin(), flat_lengths.end(), 0.0);
        if (std::abs(have - want) > 1e-9 * std::max(1.0, want)) throw DomainError("sum-flatparts violated");
    }

    /// Equal flat lengths for the given ratio.
    static FlatCoreSpec uniform(PParam p, std::vector<Sign> signs, double r) {
        if (!(p.value() > 2.0)) throw DomainError("flat-core curves require p > 2");
        const double sum = required_flat_sum(p, signs.size(), r);
        std::vector<double> lengths(signs.size() + 1, sum / static_cast<double>(signs.size() + 1));
        FlatCoreSpec spec{p, std::move(signs), std::move(lengths), r};
        spec.validate();
        return spec;
    }

    /// Explicit flat lengths; r follows from their sum.
    static FlatCoreSpec from_lengths(PParam p, std::vector<Sign> signs, std::vector<double> lengths) {
        if (!(p.value() > 2.0)) throw DomainError("flat-core curves require p > 2");
        const double K = p_loop_half_length(p);
        const double S = std::accumulate(lengths.begin(), lengths.end(), 0.0);
        const double loops = 2.0 * static_cast<double>(signs.size()) * K;
        const double r = (S + loops / (p.value() - 1.0)) / (S + loops);
        FlatCoreSpec spec{p, std::move(signs), std::move(lengths), r};
        spec.validate();
        return spec;
    }
};

/// Concatenates segment, loop, segment, ..., loop, segment.
inline ArcCurve build_flat_core(const FlatCoreSpec &spec, std::size_t M_per_piece) {
    spec.validate();
    std::vector<ArcCurve> pieces;
    for (std::size_t j = 0; j <= spec.N(); ++j) {
        if (spec.flat_lengths[j] > 0.0) pieces.push_back(sample_segment(spec.p, spec.flat_lengths[j], M_per_piece));
        if (j < spec.N()) pieces.push_back(sample_loop(spec.p, spec.signs[j], M_per_piece));
    }
    ArcCurve joined = concat(pieces);
    // Move the start to the origin (it already is unless L_1 = 0).
    PlanarTransform t;
    t.translation = Vec2{} - joined.front().pos;
    ArcCurve out = apply_transform(joined, t);
    return ArcCurve(out.p(), out.samples(), out.breaks(), "flat-core " + format_signs(spec.signs), out.apexes());
}

/// Curvature of a flat-core curve given by the sum of shifted loop curvatures.
inline double flat_core_curvature(const FlatCoreSpec &spec, double s) {
    const double K = p_loop_half_length(spec.p);
    double k = 0.0, acc = 0.0;
    for (std::size_t j = 0; j < spec.N(); ++j) {
        acc += spec.flat_lengths[j];
        const double sj = (2.0 * static_cast<double>(j) + 1.0) * K + acc;
        k += sign_value(spec.signs[j]) * 2.0 * p_sech(spec.p, s - sj);
    }
    return k;
}

// ---------------------------------------------------------------------------
// Energy and Euler-Lagrange checks.

namespace detail {

// Composite Simpson over uniformly spaced values, with a 3/8 tail when the
// interval count is odd.
inline double simpson(const std::vector<double> &f, double h) {
    const std::size_t n = f.size() - 1;
    if (n == 1) return 0.5 * h * (f[0] + f[1]);
    if (n == 2) return h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
    std::size_t m = (n % 2 == 0) ? n : n - 3;
    double sum = f[0] + f[m];
    for (std::size_t i = 1; i < m; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
    double out = h / 3.0 * sum;
    if (m != n) out += 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
    return out;
}

inline double trapezoid(const std::vector<double> &f, double h) {
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
    return sum * h;
}

// Applies a per-piece composite rule to g(sample index).
template <class G>
QuadResult piecewise_simpson(const ArcCurve &c, G &&g) {
    QuadResult out;
    for (std::size_t k = 0; k < c.piece_count(); ++k) {
        const auto [first, last] = c.piece(k);
        std::vector<double> f;
        f.reserve(last - first + 1);
        for (std::size_t i = first; i <= last; ++i) f.push_back(g(i));
        const double h = (c[last].s - c[first].s) / static_cast<double>(last - first);
        const double s = simpson(f, h);
        out.value += s;
        out.error += std::abs(s - trapezoid(f, h));
    }
    return out;
}

}  // namespace detail

/// p-bending energy: integral of |k|^p ds by composite Simpson per piece.
/// The error field is the Simpson-trapezoid difference, a conservative bound.
inline QuadResult bending_energy(const ArcCurve &curve) {
    const double p = curve.p().value();
    return detail::piecewise_simpson(curve, [&](std::size_t i) { return std::pow(std::abs(curve[i].kappa), p); });
}

namespace detail {

// sin^8 bump supported on [a, b]; vanishes to high order at the ends so
// sampled quadrature keeps its order across the support boundary.
struct Bump {
    static constexpr int m = 8;
    double a, b;
    double value(double s) const {
        if (s <= a || s >= b) return 0.0;
        return std::pow(std::sin(rate() * (s - a)), m);
    }
    double first(double s) const {
        if (s <= a || s >= b) return 0.0;
        const double c = rate(), x = c * (s - a);
        return m * c * std::pow(std::sin(x), m - 1) * std::cos(x);
    }
    double second(double s) const {
        if (s <= a || s >= b) return 0.0;
        const double c = rate(), x = c * (s - a);
        const double sn = std::sin(x), cs = std::cos(x);
        return m * c * c * std::pow(sn, m - 2) * ((m - 1) * cs * cs - sn * sn);
    }
    double rate() const { return std::numbers::pi / (b - a); }
    double sobolev_norm(double p) const {
        auto f = [&](double s) {
            return std::pow(std::abs(value(s)), p) + std::pow(std::abs(first(s)), p) + std::pow(std::abs(second(s)), p);
        };
        return std::pow(integrate(f, a, b), 1.0 / p);
    }
};

}  // namespace detail

/// Largest weak Euler-Lagrange residual
///   | int p |k|^(p-2) k phi'' + (p-1) |k|^p k phi - lambda k phi ds |
/// over n_test sin^8 bumps normalised to unit W^{2,p} norm. The bumps have
/// overlapping supports of width 2L/(n_test + 1) tiling (0, L).
inline double el_residual(const ArcCurve &curve, double lambda, int n_test) {
    if (n_test < 1) throw DomainError("el_residual needs n_test >= 1");
    const double p = curve.p().value();
    const double L = curve.length();
    const double step = L / static_cast<double>(n_test + 1);
    double worst = 0.0;
    for (int j = 0; j < n_test; ++j) {
        const detail::Bump bump{step * j, step * (j + 2)};
        const double norm = bump.sobolev_norm(p);
        const QuadResult r = detail::piecewise_simpson(curve, [&](std::size_t i) {
            const double k = curve[i].kappa, s = curve[i].s;
            const double ak = std::abs(k);
            const double w = std::pow(ak, p - 2.0) * k;
            return p * w * bump.second(s) + (p - 1.0) * std::pow(ak, p) * k * bump.value(s) - lambda * k * bump.value(s);
        });
        worst = std::max(worst, std::abs(r.value) / norm);
    }
    return worst;
}

/// Least-squares multiplier lambda in p w'' + (p - 1)|k|^p k = lambda k with
/// w = |k|^(p-2) k, using samples whose stencil has |k| >= 0.1 max|k|, and fourth-order central
/// differences for w'' inside each piece.
inline double estimate_lambda(const ArcCurve &curve) {
    const double p = curve.p().value();
    const double kmax = curve.max_abs_kappa();
    if (!(kmax > 0.0)) throw DomainError("lambda undetermined: curvature vanishes identically");
    auto w = [&](std::size_t i) {
        const double k = curve[i].kappa;
        return std::pow(std::abs(k), p - 2.0) * k;
    };
    double num = 0.0, den = 0.0;
    for (std::size_t piece = 0; piece < curve.piece_count(); ++piece) {
        const auto [first, last] = curve.piece(piece);
        for (std::size_t i = first + 1; i < last; ++i) {
            const double k = curve[i].kappa;
            const std::size_t lo = i >= first + 2 ? i - 2 : first, hi = std::min(i + 2, last);
            bool usable = true;
            for (std::size_t j = lo; j <= hi; ++j) usable = usable && std::abs(curve[j].kappa) >= 0.1 * kmax;
            if (!usable) continue;
            const double h = (curve[last].s - curve[first].s) / static_cast<double>(last - first);
            double w2;
            if (i >= first + 2 && i + 2 <= last)
                w2 = (-w(i - 2) + 16.0 * w(i - 1) - 30.0 * w(i) + 16.0 * w(i + 1) - w(i + 2)) / (12.0 * h * h);
            else if (last - first < 5)
                w2 = (w(i + 1) - 2.0 * w(i) + w(i - 1)) / (h * h);
            else if (i == first + 1)
                w2 = (10.0 * w(i - 1) - 15.0 * w(i) - 4.0 * w(i + 1) + 14.0 * w(i + 2) - 6.0 * w(i + 3) + w(i + 4)) /
                     (12.0 * h * h);
            else
                w2 = (10.0 * w(i + 1) - 15.0 * w(i) - 4.0 * w(i - 1) + 14.0 * w(i - 2) - 6.0 * w(i - 3) + w(i - 4)) /
                     (12.0 * h * h);
            num += k * (p * w2 + (p - 1.0) * std::pow(std::abs(k), p) * k);
            den += k * k;
        }
    }
    if (!(den > 0.0)) throw DomainError("lambda undetermined: no usable samples");
    return num / den;
}

}  // namespace pelastica
