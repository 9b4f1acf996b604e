// Command-line front end for the pelastica library.

#include <pelastica/pelastica.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace pelastica;

namespace {

enum class Format { csv, json, svg };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Format parse_format(const std::string &s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    if (s == "svg") return Format::svg;
    throw UsageError("unknown format '" + s + "'");
}

// Explicit --format wins, then the extension of --out, then the fallback.
Format resolve_format(const std::string &format, const std::string &out, Format fallback) {
    if (!format.empty()) return parse_format(format);
    const std::string ext = fs::path(out).extension().string();
    if (ext == ".csv") return Format::csv;
    if (ext == ".json") return Format::json;
    if (ext == ".svg") return Format::svg;
    return fallback;
}

fs::path resolve_output(const std::string &out) {
    fs::path path(out);
    if (path.is_relative()) {
        if (const char *dir = std::getenv("PELASTICA_OUTPUT_DIR"); dir && *dir) path = fs::path(dir) / path;
    }
    return path;
}

// Writes through `emit` to the resolved path, or to stdout when out is empty.
template <class Emit>
void write_output(const std::string &out, Emit &&emit) {
    if (out.empty()) {
        emit(std::cout);
        std::cout.flush();
        return;
    }
    const fs::path path = resolve_output(out);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("cannot open '" + path.string() + "' for writing");
    emit(os);
    os.flush();
    if (!os) throw UsageError("failed writing '" + path.string() + "'");
}

void write_curve(const ArcCurve &curve, const std::string &out, Format format) {
    write_output(out, [&](std::ostream &os) {
        switch (format) {
        case Format::csv: write_curve_csv(os, curve); break;
        case Format::json: os << curve_metadata(curve).dump(2) << '\n'; break;
        case Format::svg: write_curve_svg(os, curve); break;
        }
    });
}

std::string real17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Special {
    double p = 0.0;
    std::string fn;
    double q = 0.0;
    double x = 0.0;
};

int run_special(const Special &a) {
    const PParam p(a.p);
    const Modulus q(a.q);
    double v = 0.0;
    if (a.fn == "K1p")
        v = p_comp_ellint_1(p, q);
    else if (a.fn == "F1p")
        v = p_ellint_1(p, a.x, q);
    else if (a.fn == "E1p")
        v = p_comp_ellint_2(p, q);
    else if (a.fn == "E1p_inc")
        v = p_ellint_2(p, a.x, q);
    else if (a.fn == "Qp")
        v = p_elliptic_ratio(p, q);
    else if (a.fn == "am1p")
        v = p_am(p, a.x, q).value();
    else if (a.fn == "snp")
        v = p_sn(p, a.x, q);
    else if (a.fn == "cnp")
        v = p_cn(p, a.x, q);
    else if (a.fn == "sechp")
        v = p_sech(p, a.x);
    else if (a.fn == "tanhp")
        v = p_tanh(p, a.x);
    else
        throw UsageError("unknown function '" + a.fn + "'");
    std::cout << real17(v) << '\n';
    return 0;
}

struct CurveArgs {
    bool wavelike = false, loop = false, segment = false, flatcore = false;
    double p = 4.0;
    double q = 0.5;
    std::optional<double> s_lo, s_hi;
    std::string sign = "+";
    double length = 1.0;
    int N = 1;
    std::string signs;
    bool uniform = false;
    std::vector<double> flat_lengths;
    double r = 0.5;
    std::size_t M = 1000;
    std::string out, format;
};

int run_curve(const CurveArgs &a) {
    const int kinds = a.wavelike + a.loop + a.segment + a.flatcore;
    if (kinds != 1) throw UsageError("curve needs exactly one of --wavelike, --loop, --segment, --flatcore");
    const PParam p(a.p);
    std::optional<ArcCurve> curve;
    if (a.wavelike) {
        const Modulus q(a.q);
        const double K = p_comp_ellint_1(p, q);
        curve = sample_wavelike(p, q, a.s_lo.value_or(0.0), a.s_hi.value_or(4.0 * K), a.M);
    } else if (a.loop) {
        const auto sg = parse_signs(a.sign);
        if (sg.size() != 1) throw UsageError("--sign takes a single + or -");
        curve = sample_loop(p, sg[0], a.M, a.s_lo, a.s_hi);
    } else if (a.segment) {
        curve = sample_segment(p, a.length, a.M);
    } else {
        std::vector<Sign> sg;
        if (a.signs.empty())
            for (int i = 0; i < a.N; ++i) sg.push_back(i % 2 ? Sign::minus : Sign::plus);
        else
            sg = parse_signs(a.signs);
        if (sg.size() != static_cast<std::size_t>(a.N)) throw DomainError("--signs must have N entries");
        if (!a.flat_lengths.empty() && a.uniform) throw UsageError("--uniform and --flat-lengths are exclusive");
        const FlatCoreSpec spec = a.flat_lengths.empty() ? FlatCoreSpec::uniform(p, sg, a.r)
                                                         : FlatCoreSpec::from_lengths(p, sg, a.flat_lengths);
        curve = build_flat_core(spec, a.M);
    }
    write_curve(*curve, a.out, resolve_format(a.format, a.out, Format::csv));
    return 0;
}

struct HookedArgs {
    double p = 4.0;
    double ell = 0.5;
    double L = 1.0;
    int n = 1;
    std::string signs;
    std::size_t M = 1000;
    bool mirror = false;
    std::string out, format;
};

int run_hooked(const HookedArgs &a) {
    const HookedProblem prob(PParam(a.p), a.ell, a.L);
    const HookedBranch b = HookedBranch::canonical(prob, a.n, a.signs.empty() ? std::vector<Sign>{} : parse_signs(a.signs));
    ArcCurve curve = build_hooked(prob, b, a.M);
    const Format format = resolve_format(a.format, a.out, Format::json);
    if (format == Format::json) {
        Json report = hooked_report(prob, b, curve);
        if (a.mirror) report["mirrored_bc_report"] = to_json(verify_hooked_bc(mirror_hooked(curve), HookedEnd::initial));
        write_output(a.out, [&](std::ostream &os) { os << report.dump(2) << '\n'; });
        return 0;
    }
    if (a.mirror) curve = mirror_hooked(curve);
    write_curve(curve, a.out, format);
    return 0;
}

struct ProbeArgs {
    std::string config;
    std::map<std::string, std::string> overrides;
    std::string out, trajectories;
    bool serial = false;
    std::uint64_t seed = 0;
};

int run_probe(const ProbeArgs &a) {
    ProbeConfig cfg;
    if (!a.config.empty()) {
        std::ifstream is(a.config);
        if (!is) throw UsageError("cannot read configuration '" + a.config + "'");
        cfg = parse_probe_config(is, cfg);
    }
    for (const auto &[key, value] : a.overrides) cfg.set(key, value);
    cfg.validate();
    ProbeOptions opt;
    opt.base_seed = a.seed;
    opt.descent.max_iter = cfg.max_iter;
    opt.descent.gtol = cfg.gtol;
    opt.parallel = !a.serial;
    opt.record_trajectory = !a.trajectories.empty();
    const ProbeReport rep = probe_stability(cfg.spec(), cfg.eps, cfg.seeds, cfg.M, opt);
    write_output(a.out, [&](std::ostream &os) { os << to_json(rep).dump(2) << '\n'; });
    if (!a.trajectories.empty())
        write_output(a.trajectories, [&](std::ostream &os) { write_trajectories_csv(os, rep); });
    return 0;
}

int run_verify(bool quiet) {
    const SuiteSummary s = run_identity_suite();
    std::map<std::string, std::pair<int, int>> groups;
    std::vector<std::string> order;
    for (const CheckResult &c : s.checks) {
        if (!groups.count(c.group)) order.push_back(c.group);
        auto &g = groups[c.group];
        g.first += c.pass;
        ++g.second;
        if (!quiet || !c.pass)
            std::cout << (c.pass ? "ok   " : "FAIL ") << c.group << ": " << c.name << "  value " << real17(c.value)
                      << "  tol " << c.tolerance << '\n';
    }
    for (const std::string &g : order)
        std::cout << g << ": " << groups[g].first << "/" << groups[g].second << " passed\n";
    std::cout << "total: " << s.passed() << "/" << s.total() << " passed\n";
    return s.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"p-elliptic functions, p-elastica curves, hooked classification and stability probes"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Base seed for every random choice")->capture_default_str();
    app.fallthrough();

    Special sp;
    auto *special = app.add_subcommand("special", "Evaluate a p-elliptic special function");
    special->add_option("--p", sp.p, "Exponent p > 1")->required();
    special->add_option("--fn", sp.fn, "K1p F1p E1p E1p_inc Qp am1p snp cnp sechp tanhp")
        ->required()
        ->check(CLI::IsMember({"K1p", "F1p", "E1p", "E1p_inc", "Qp", "am1p", "snp", "cnp", "sechp", "tanhp"}));
    special->add_option("--q", sp.q, "Modulus in [0, 1]")->capture_default_str();
    special->add_option("--x", sp.x, "Argument")->capture_default_str();

    CurveArgs ca;
    auto *curve = app.add_subcommand("curve", "Sample a p-elastica curve");
    curve->add_flag("--wavelike", ca.wavelike, "Wavelike curve on [s-lo, s-hi]");
    curve->add_flag("--loop", ca.loop, "Single loop");
    curve->add_flag("--segment", ca.segment, "Straight segment");
    curve->add_flag("--flatcore", ca.flatcore, "Flat-core pinned curve");
    curve->add_option("--p", ca.p)->capture_default_str();
    curve->add_option("--q", ca.q)->capture_default_str();
    curve->add_option("--s-lo", ca.s_lo);
    curve->add_option("--s-hi", ca.s_hi);
    curve->add_option("--sign", ca.sign, "Loop sign + or -")->capture_default_str();
    curve->add_option("--length", ca.length, "Segment length")->capture_default_str();
    curve->add_option("--N", ca.N, "Number of loops")->capture_default_str();
    curve->add_option("--signs", ca.signs, "Loop signs such as +-");
    curve->add_flag("--uniform", ca.uniform, "Equal flat lengths");
    curve->add_option("--flat-lengths", ca.flat_lengths, "N + 1 flat lengths")->delimiter(',');
    curve->add_option("--r", ca.r, "Chord ratio")->capture_default_str();
    curve->add_option("--M", ca.M, "Sampling intervals per piece")->capture_default_str();
    curve->add_option("--out", ca.out, "Output path (stdout if omitted)");
    curve->add_option("--format", ca.format, "csv, json or svg");

    HookedArgs ha;
    auto *hooked = app.add_subcommand("hooked", "Classify, build and verify a hooked p-elastica");
    hooked->add_option("--p", ha.p)->capture_default_str();
    hooked->add_option("--ell", ha.ell, "Horizontal displacement")->capture_default_str();
    hooked->add_option("--L", ha.L, "Length")->capture_default_str();
    hooked->add_option("--n", ha.n, "Member index")->capture_default_str();
    hooked->add_option("--signs", ha.signs, "Flat-core loop signs");
    hooked->add_option("--M", ha.M, "Sampling intervals per half wave")->capture_default_str();
    hooked->add_flag("--mirror", ha.mirror, "Reverse and reflect (tangent -e1 at the start)");
    hooked->add_option("--out", ha.out, "Output path (stdout if omitted)");
    hooked->add_option("--format", ha.format, "json (report), csv or svg");

    ProbeArgs pa;
    std::map<std::string, std::string> probe_flags;
    auto *probe = app.add_subcommand("probe", "Perturb-and-descend stability probe of a flat-core curve");
    probe->add_option("--config", pa.config, "Key-value configuration file");
    const std::vector<std::pair<std::string, std::string>> probe_keys{
        {"--p", "p"},         {"--N", "N"},         {"--signs", "signs"},       {"--flat-lengths", "flat_lengths"},
        {"--r", "r"},         {"--eps", "eps"},     {"--seeds", "seeds"},       {"--M", "M"},
        {"--max-iter", "max_iter"}, {"--gtol", "gtol"}};
    for (const auto &[flag, key] : probe_keys) probe->add_option(flag, probe_flags[key]);
    bool probe_uniform = false;
    probe->add_flag("--uniform", probe_uniform, "Equal flat lengths");
    probe->add_option("--out", pa.out, "Report path (stdout if omitted)");
    probe->add_option("--trajectories", pa.trajectories, "CSV of per-seed energies");
    probe->add_flag("--serial", pa.serial, "Run seeds sequentially");

    bool quiet = false;
    auto *verify = app.add_subcommand("verify", "Run the identity suite");
    verify->add_flag("--quiet", quiet, "Print failures and counts only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*special) return run_special(sp);
        if (*curve) return run_curve(ca);
        if (*hooked) return run_hooked(ha);
        if (*probe) {
            pa.seed = seed;
            for (const auto &[flag, key] : probe_keys)
                if (probe->count(flag) > 0) pa.overrides[key] = probe_flags[key];
            if (probe_uniform && pa.overrides.count("flat_lengths"))
                throw UsageError("--uniform and --flat-lengths are exclusive");
            if (probe_uniform) pa.overrides["uniform"] = "true";
            return run_probe(pa);
        }
        if (*verify) return run_verify(quiet);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError &e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
