#pragma once

// Serialization: curve CSV / JSON metadata / SVG, probe configuration files
// and JSON reports.

#include <pelastica/curves.hpp>
#include <pelastica/error.hpp>
#include <pelastica/hooked.hpp>
#include <pelastica/stability.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pelastica {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string format_real(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(17);
    os << v;
    return os.str();
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Strict decimal parse of a whole string; throws DomainError naming `what`.
inline double parse_real(std::string_view text, const std::string &what) {
    text = detail::trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw DomainError("cannot parse " + what + ": '" + std::string(text) + "'");
    return v;
}

inline long long parse_integer(std::string_view text, const std::string &what) {
    text = detail::trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw DomainError("cannot parse " + what + ": '" + std::string(text) + "'");
    return v;
}

/// Comma- or whitespace-separated list of reals.
inline std::vector<double> parse_real_list(std::string_view text, const std::string &what) {
    std::vector<double> out;
    std::string buf(text);
    std::replace(buf.begin(), buf.end(), ',', ' ');
    std::istringstream is(buf);
    std::string tok;
    while (is >> tok) out.push_back(parse_real(tok, what));
    if (out.empty()) throw DomainError("empty list for " + what);
    return out;
}

// ---------------------------------------------------------------------------
// Curves.

/// Header `s,x,y,theta,kappa`, one row per sample, 17 significant digits.
inline void write_curve_csv(std::ostream &os, const ArcCurve &curve) {
    os << "s,x,y,theta,kappa\n";
    for (const CurveSample &c : curve.samples())
        os << detail::format_real(c.s) << ',' << detail::format_real(c.pos.x) << ',' << detail::format_real(c.pos.y)
           << ',' << detail::format_real(c.theta) << ',' << detail::format_real(c.kappa) << '\n';
}

/// Reads back a CSV written by write_curve_csv as a single-piece curve.
inline ArcCurve read_curve_csv(std::istream &is, PParam p) {
    std::string line;
    if (!std::getline(is, line) || detail::trim(line) != "s,x,y,theta,kappa")
        throw DomainError("curve CSV must start with the header s,x,y,theta,kappa");
    std::vector<CurveSample> samples;
    while (std::getline(is, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<double> v;
        std::string_view rest(line);
        for (int k = 0; k < 5; ++k) {
            const auto comma = rest.find(',');
            v.push_back(parse_real(rest.substr(0, comma), "curve CSV field"));
            if (comma == std::string_view::npos) {
                rest = {};
                if (k != 4) throw DomainError("curve CSV row needs five fields");
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (!detail::trim(rest).empty()) throw DomainError("curve CSV row has extra fields");
        samples.push_back({v[0], {v[1], v[2]}, v[3], v[4]});
    }
    return ArcCurve(p, std::move(samples));
}

/// {p, length, energy, construction}.
inline Json curve_metadata(const ArcCurve &curve) {
    Json j;
    j["p"] = curve.p().value();
    j["length"] = curve.length();
    j["energy"] = bending_energy(curve).value;
    j["construction"] = curve.construction();
    return j;
}

struct SvgStyle {
    double width = 800.0;
    double stroke_width = 0.004;
    double marker_radius = 0.012;
};

/// One path per piece plus start/end markers. The y axis is flipped so the
/// picture has the usual mathematical orientation; the viewBox is the
/// bounding box padded by 5% of its larger side on every edge.
inline void write_curve_svg(std::ostream &os, const ArcCurve &curve, const SvgStyle &style = {}) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const CurveSample &c : curve.samples()) {
        xmin = std::min(xmin, c.pos.x);
        xmax = std::max(xmax, c.pos.x);
        ymin = std::min(ymin, -c.pos.y);
        ymax = std::max(ymax, -c.pos.y);
    }
    double span = std::max(xmax - xmin, ymax - ymin);
    if (!(span > 0.0)) span = 1.0;
    const double pad = 0.05 * span;
    const double vx = xmin - pad, vy = ymin - pad, vw = xmax - xmin + 2 * pad, vh = ymax - ymin + 2 * pad;
    const double height = style.width * vh / vw;
    auto f = detail::format_real;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f(style.width) << "\" height=\"" << f(height)
       << "\" viewBox=\"" << f(vx) << ' ' << f(vy) << ' ' << f(vw) << ' ' << f(vh) << "\">\n";
    const double sw = style.stroke_width * span, mr = style.marker_radius * span;
    for (std::size_t i = 0; i < curve.piece_count(); ++i) {
        const auto [first, last] = curve.piece(i);
        os << "<path class=\"piece\" fill=\"none\" stroke=\"black\" stroke-width=\"" << f(sw) << "\" d=\"";
        for (std::size_t k = first; k <= last; ++k)
            os << (k == first ? "M" : " L") << f(curve[k].pos.x) << ',' << f(-curve[k].pos.y);
        os << "\"/>\n";
    }
    os << "<circle class=\"endpoint\" cx=\"" << f(curve.front().pos.x) << "\" cy=\"" << f(-curve.front().pos.y)
       << "\" r=\"" << f(mr) << "\" fill=\"green\"/>\n";
    os << "<circle class=\"endpoint\" cx=\"" << f(curve.back().pos.x) << "\" cy=\"" << f(-curve.back().pos.y)
       << "\" r=\"" << f(mr) << "\" fill=\"red\"/>\n";
    os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Hooked report.

inline Json to_json(const BcReport &r) {
    return Json{{"k0", r.k0}, {"kL", r.kL}, {"wprimeL", r.wprimeL}, {"pass", r.pass}};
}

/// {branch, n, q?, energy_closed_form, energy_quadrature, bc_report}.
inline Json hooked_report(const HookedProblem &prob, const HookedBranch &b, const ArcCurve &curve) {
    Json j;
    j["branch"] = to_string(b.kind);
    j["n"] = b.n;
    if (b.q) j["q"] = b.q->value();
    j["energy_closed_form"] = hooked_energy(prob, b.n);
    j["energy_quadrature"] = bending_energy(curve).value;
    j["bc_report"] = to_json(verify_hooked_bc(curve));
    return j;
}

// ---------------------------------------------------------------------------
// Probe configuration and report.

/// Key-value probe configuration. Lines are `key = value`; `#` starts a
/// comment. Either `flat_lengths` or `uniform` (with `r`) fixes the segments.
struct ProbeConfig {
    double p = 4.0;
    int N = 1;
    std::string signs;
    std::optional<std::vector<double>> flat_lengths;
    bool uniform = true;
    double r = 0.5;
    double eps = 0.02;
    int seeds = 20;
    std::size_t M = 400;
    int max_iter = 2000;
    double gtol = 1e-6;

    static const std::vector<std::string> &keys() {
        static const std::vector<std::string> k{"p",     "N",   "signs", "flat_lengths", "uniform", "r",
                                                "eps",   "seeds", "M",  "max_iter",     "gtol"};
        return k;
    }

    /// Applies one key; unknown keys and bad values throw DomainError.
    void set(const std::string &key, std::string_view value) {
        if (key == "p")
            p = parse_real(value, key);
        else if (key == "N")
            N = static_cast<int>(parse_integer(value, key));
        else if (key == "signs")
            signs = std::string(detail::trim(value));
        else if (key == "flat_lengths") {
            flat_lengths = parse_real_list(value, key);
            uniform = false;
        } else if (key == "uniform") {
            const auto v = detail::trim(value);
            if (v == "true" || v == "1" || v == "yes" || v.empty())
                uniform = true;
            else if (v == "false" || v == "0" || v == "no")
                uniform = false;
            else
                throw DomainError("cannot parse uniform: '" + std::string(v) + "'");
            if (uniform) flat_lengths.reset();
        } else if (key == "r")
            r = parse_real(value, key);
        else if (key == "eps")
            eps = parse_real(value, key);
        else if (key == "seeds")
            seeds = static_cast<int>(parse_integer(value, key));
        else if (key == "M") {
            const long long m = parse_integer(value, key);
            if (m < 3) throw DomainError("M must be >= 3");
            M = static_cast<std::size_t>(m);
        } else if (key == "max_iter")
            max_iter = static_cast<int>(parse_integer(value, key));
        else if (key == "gtol")
            gtol = parse_real(value, key);
        else
            throw DomainError("unknown probe configuration key '" + key + "'");
    }

    FlatCoreSpec spec() const {
        if (N < 1) throw DomainError("N must be >= 1");
        std::vector<Sign> sg;
        if (signs.empty())
            for (int i = 0; i < N; ++i) sg.push_back(i % 2 ? Sign::minus : Sign::plus);
        else
            sg = parse_signs(signs);
        if (sg.size() != static_cast<std::size_t>(N)) throw DomainError("signs must have N entries");
        const PParam pp(p);
        if (flat_lengths) return FlatCoreSpec::from_lengths(pp, sg, *flat_lengths);
        if (!uniform) throw DomainError("either flat_lengths or uniform must be given");
        return FlatCoreSpec::uniform(pp, sg, r);
    }

    void validate() const {
        if (!(eps >= 0.0)) throw DomainError("eps must be >= 0");
        if (seeds < 1) throw DomainError("seeds must be >= 1");
        if (max_iter < 0) throw DomainError("max_iter must be >= 0");
        if (!(gtol > 0.0)) throw DomainError("gtol must be > 0");
        spec();
    }
};

inline ProbeConfig parse_probe_config(std::istream &is, ProbeConfig cfg = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string_view v(line);
        if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
        v = detail::trim(v);
        if (v.empty()) continue;
        const auto eq = v.find('=');
        if (eq == std::string_view::npos)
            throw DomainError("probe configuration line " + std::to_string(lineno) + ": expected key = value");
        const std::string key(detail::trim(v.substr(0, eq)));
        cfg.set(key, v.substr(eq + 1));
    }
    return cfg;
}

inline Json to_json(const SeedOutcome &s) {
    Json j{{"seed", s.seed},         {"E_start", s.E_start},       {"E_final", s.E_final},
           {"sup_dev", s.sup_dev},   {"iterations", s.iterations}, {"converged", s.converged},
           {"partition_checks", s.partition_checks}, {"bound_failures", s.bound_failures}};
    j["min_bound_slack"] = std::isfinite(s.min_bound_slack) ? Json(s.min_bound_slack) : Json(nullptr);
    return j;
}

inline Json to_json(const ProbeReport &r) {
    Json j;
    j["p"] = r.p;
    j["signs"] = r.signs;
    j["flat_lengths"] = r.flat_lengths;
    j["M"] = r.M;
    j["eps"] = r.eps;
    j["E_closed_form"] = r.E_closed_form;
    j["E_ref"] = r.E_ref;
    j["reference_converged"] = r.reference_converged;
    j["seeds"] = Json::array();
    for (const SeedOutcome &s : r.seeds) j["seeds"].push_back(to_json(s));
    j["verdict"] = to_string(r.verdict);
    return j;
}

/// Columns seed,iteration,energy.
inline void write_trajectories_csv(std::ostream &os, const ProbeReport &r) {
    os << "seed,iteration,energy\n";
    for (const SeedOutcome &s : r.seeds)
        for (std::size_t i = 0; i < s.trajectory.size(); ++i)
            os << s.seed << ',' << i << ',' << detail::format_real(s.trajectory[i]) << '\n';
}

}  // namespace pelastica
