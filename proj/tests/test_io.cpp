#include <pelastica/io.hpp>
#include <pelastica/verify.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <sstream>
#include <string>

using namespace pelastica;

TEST(Parse, Reals) {
    EXPECT_EQ(parse_real("  2.5 ", "x"), 2.5);
    EXPECT_EQ(parse_real("-1e-3", "x"), -1e-3);
    EXPECT_THROW(parse_real("2.5x", "x"), DomainError);
    EXPECT_THROW(parse_real("", "x"), DomainError);
    EXPECT_EQ(parse_integer("42", "n"), 42);
    EXPECT_THROW(parse_integer("4.2", "n"), DomainError);
    const auto v = parse_real_list("0.5, 1.25 2", "l");
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(v[1], 1.25);
}

TEST(Csv, RoundTripIsExact) {
    const ArcCurve c = build_flat_core(FlatCoreSpec::uniform(PParam(4.0), parse_signs("+-"), 0.5), 50);
    std::stringstream ss;
    write_curve_csv(ss, c);
    const ArcCurve back = read_curve_csv(ss, PParam(4.0));
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(back[i].s, c[i].s);
        EXPECT_EQ(back[i].pos.x, c[i].pos.x);
        EXPECT_EQ(back[i].pos.y, c[i].pos.y);
        EXPECT_EQ(back[i].theta, c[i].theta);
        EXPECT_EQ(back[i].kappa, c[i].kappa);
    }
}

TEST(Csv, EndTangentRows) {
    const ArcCurve c = build_flat_core(FlatCoreSpec::uniform(PParam(4.0), parse_signs("+-"), 0.5), 100);
    std::stringstream ss;
    write_curve_csv(ss, c);
    std::string header, first, last, line;
    std::getline(ss, header);
    std::getline(ss, first);
    while (std::getline(ss, line))
        if (!line.empty()) last = line;
    auto theta_of = [](const std::string &row) {
        std::stringstream r(row);
        std::string f;
        for (int k = 0; k < 4; ++k) std::getline(r, f, ',');
        return std::stod(f);
    };
    EXPECT_EQ(header, "s,x,y,theta,kappa");
    EXPECT_NEAR(std::cos(theta_of(first)), -1.0, 1e-12);
    EXPECT_NEAR(std::cos(theta_of(last)), -1.0, 1e-12);
}

TEST(Csv, RejectsMalformed) {
    std::stringstream a("x,y\n");
    EXPECT_THROW(read_curve_csv(a, PParam(3.0)), DomainError);
    std::stringstream b("s,x,y,theta,kappa\n0,1,2,3\n");
    EXPECT_THROW(read_curve_csv(b, PParam(3.0)), DomainError);
    std::stringstream c("s,x,y,theta,kappa\n0,1,2,3,4,5\n");
    EXPECT_THROW(read_curve_csv(c, PParam(3.0)), DomainError);
}

TEST(Svg, OnePathPerPieceAndPaddedViewBox) {
    const ArcCurve c = build_flat_core(FlatCoreSpec::uniform(PParam(4.0), parse_signs("+-"), 0.5), 40);
    std::stringstream ss;
    write_curve_svg(ss, c);
    const std::string svg = ss.str();
    const std::regex path_re("<path class=\"piece\"");
    const auto paths = std::distance(std::sregex_iterator(svg.begin(), svg.end(), path_re), std::sregex_iterator());
    EXPECT_EQ(static_cast<std::size_t>(paths), c.piece_count());
    const std::regex circ_re("<circle class=\"endpoint\"");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), circ_re), std::sregex_iterator()), 2);

    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, std::regex("viewBox=\"([^ ]+) ([^ ]+) ([^ ]+) ([^\"]+)\"")));
    const double vx = std::stod(m[1]), vy = std::stod(m[2]), vw = std::stod(m[3]), vh = std::stod(m[4]);
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto &s : c.samples()) {
        xmin = std::min(xmin, s.pos.x);
        xmax = std::max(xmax, s.pos.x);
        ymin = std::min(ymin, -s.pos.y);
        ymax = std::max(ymax, -s.pos.y);
    }
    const double pad = 0.05 * std::max(xmax - xmin, ymax - ymin);
    EXPECT_NEAR(vx, xmin - pad, 1e-12);
    EXPECT_NEAR(vy, ymin - pad, 1e-12);
    EXPECT_NEAR(vw, xmax - xmin + 2 * pad, 1e-12);
    EXPECT_NEAR(vh, ymax - ymin + 2 * pad, 1e-12);
}

TEST(Json, CurveMetadataAndHookedReport) {
    const HookedProblem prob(PParam(4.0), 0.5, 1.0);
    const HookedBranch b = HookedBranch::canonical(prob, 1);
    const ArcCurve c = build_hooked(prob, b, 500);
    const Json meta = curve_metadata(c);
    EXPECT_EQ(meta["p"].get<double>(), 4.0);
    EXPECT_NEAR(meta["length"].get<double>(), 1.0, 1e-12);
    const Json rep = hooked_report(prob, b, c);
    EXPECT_EQ(rep["branch"], "flatcore");
    EXPECT_FALSE(rep.contains("q"));
    EXPECT_TRUE(rep["bc_report"]["pass"].get<bool>());
    EXPECT_NEAR(rep["energy_quadrature"].get<double>() / rep["energy_closed_form"].get<double>(), 1.0, 1e-6);
}

TEST(Json, DoublesRoundTrip) {
    const double x = 0.1 + 0.2;
    const Json j{{"x", x}};
    EXPECT_EQ(Json::parse(j.dump())["x"].get<double>(), x);
}

TEST(Config, ParsesKeysAndComments) {
    std::stringstream ss("# probe\np = 3.5\nN=2  # two loops\nsigns = +-\nflat_lengths = 0.5, 0.25, 0.5\n"
                         "eps = 0.01\nseeds = 4\nM = 300\nmax_iter = 100\ngtol = 1e-9\n");
    const ProbeConfig cfg = parse_probe_config(ss);
    EXPECT_EQ(cfg.p, 3.5);
    EXPECT_EQ(cfg.N, 2);
    EXPECT_FALSE(cfg.uniform);
    ASSERT_TRUE(cfg.flat_lengths.has_value());
    EXPECT_EQ(cfg.flat_lengths->size(), 3u);
    EXPECT_EQ(cfg.seeds, 4);
    EXPECT_EQ(cfg.M, 300u);
    const FlatCoreSpec spec = cfg.spec();
    EXPECT_EQ(format_signs(spec.signs), "+-");
    EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, Errors) {
    std::stringstream a("bogus = 1\n");
    EXPECT_THROW(parse_probe_config(a), DomainError);
    std::stringstream b("p 4\n");
    EXPECT_THROW(parse_probe_config(b), DomainError);
    std::stringstream c("M = 2\n");
    EXPECT_THROW(parse_probe_config(c), DomainError);
    ProbeConfig cfg;
    cfg.N = 2;
    cfg.signs = "+";
    EXPECT_THROW(cfg.spec(), DomainError);
    cfg.signs = "";
    cfg.uniform = false;
    EXPECT_THROW(cfg.spec(), DomainError);
}

TEST(Config, DefaultsGiveAlternatingSpec) {
    ProbeConfig cfg;
    cfg.N = 3;
    const FlatCoreSpec spec = cfg.spec();
    EXPECT_EQ(format_signs(spec.signs), "+-+");
    EXPECT_TRUE(spec.alternating());
    EXPECT_NEAR(spec.r, 0.5, 1e-15);
}

TEST(Report, JsonAndTrajectories) {
    ProbeOptions opt;
    opt.record_trajectory = true;
    opt.descent.max_iter = 5;
    const ProbeReport rep =
        probe_stability(FlatCoreSpec::uniform(PParam(4.0), parse_signs("+"), 0.5), 0.02, 2, 100, opt);
    const Json j = to_json(rep);
    EXPECT_EQ(j["seeds"].size(), 2u);
    EXPECT_TRUE(j.contains("verdict"));
    EXPECT_EQ(j["M"].get<std::size_t>(), 100u);
    std::stringstream ss;
    write_trajectories_csv(ss, rep);
    std::string header;
    std::getline(ss, header);
    EXPECT_EQ(header, "seed,iteration,energy");
    std::size_t rows = 0;
    for (std::string line; std::getline(ss, line);) rows += !line.empty();
    EXPECT_EQ(rows, rep.seeds[0].trajectory.size() + rep.seeds[1].trajectory.size());
    SeedOutcome s;
    EXPECT_TRUE(to_json(s)["min_bound_slack"].is_null());
}

TEST(Verify, IdentitySuitePasses) {
    const SuiteSummary s = run_identity_suite();
    EXPECT_GT(s.total(), 40);
    for (const CheckResult &c : s.checks) EXPECT_TRUE(c.pass) << c.group << " " << c.name << " " << c.value;
}
