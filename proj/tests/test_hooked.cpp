#include <pelastica/hooked.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace pelastica;

TEST(Classify, Branches) {
    EXPECT_EQ(classify_branch(HookedProblem(PParam(2.0), 0.9, 1.0)), HookedKind::wavelike);
    EXPECT_EQ(classify_branch(HookedProblem(PParam(1.5), 0.1, 1.0)), HookedKind::wavelike);
    EXPECT_EQ(classify_branch(HookedProblem(PParam(4.0), 0.5, 1.0)), HookedKind::flatcore);
    EXPECT_EQ(classify_branch(HookedProblem(PParam(4.0), 0.2, 1.0)), HookedKind::wavelike);
    EXPECT_EQ(classify_branch(HookedProblem(PParam(4.0), 1.0, 3.0)), HookedKind::flatcore);
}

TEST(Problem, Validation) {
    EXPECT_THROW(HookedProblem(PParam(3.0), 0.0, 1.0), DomainError);
    EXPECT_THROW(HookedProblem(PParam(3.0), 1.0, 1.0), DomainError);
    EXPECT_THROW(HookedProblem(PParam(3.0), 0.5, NAN), DomainError);
}

TEST(Branch, CanonicalAndValidate) {
    const HookedProblem wave(PParam(4.0), 0.2, 1.0);
    const HookedBranch bw = HookedBranch::canonical(wave, 2);
    ASSERT_TRUE(bw.q.has_value());
    EXPECT_NEAR(p_elliptic_ratio(PParam(4.0), *bw.q), -0.2, 1e-12);
    const HookedProblem flat(PParam(4.0), 0.5, 1.0);
    const HookedBranch bf = HookedBranch::canonical(flat, 3, parse_signs("+-+"));
    EXPECT_EQ(bf.flat_lengths.size(), 3u);
    EXPECT_THROW(bw.validate(flat), DomainError);
    EXPECT_THROW(HookedBranch::canonical(flat, 2, parse_signs("+")), DomainError);
    EXPECT_THROW(HookedBranch::canonical(flat, 0), DomainError);
    HookedBranch skew = bf;
    skew.flat_lengths[0] += 0.01;
    EXPECT_THROW(skew.validate(flat), DomainError);
    skew.flat_lengths[1] -= 0.01;
    EXPECT_NO_THROW(skew.validate(flat));
}

TEST(Build, WavelikeGeometry) {
    for (double pv : {2.0, 4.0}) {
        const HookedProblem prob(PParam(pv), 0.25, 1.0);
        for (int n : {1, 2, 3}) {
            const ArcCurve c = build_hooked(prob, HookedBranch::canonical(prob, n), 400);
            EXPECT_NEAR(c.length(), 1.0, 1e-12);
            EXPECT_NEAR(std::cos(c.back().theta), -1.0, 1e-8);
            EXPECT_NEAR(std::abs(c.displacement().x), 0.25, 1e-9);
            EXPECT_NEAR(c.front().pos.norm(), 0.0, 1e-14);
        }
    }
}

TEST(Build, FlatcoreGeometry) {
    const HookedProblem prob(PParam(4.0), 0.5, 1.0);
    const HookedBranch b = HookedBranch::canonical(prob, 1);
    const ArcCurve c = build_hooked(prob, b, 1000);
    EXPECT_NEAR(c.length(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(c.displacement().x), 0.5, 1e-9);
    EXPECT_NEAR(std::cos(c.back().theta), -1.0, 1e-8);
    const double alpha = hooked_alpha(prob, b);
    EXPECT_NEAR(std::abs(c.back().kappa), 2.0 * alpha, 1e-9);
    EXPECT_NEAR(c.front().kappa, 0.0, 1e-14);
}

TEST(Build, FlatcoreMultipleLoops) {
    const HookedProblem prob(PParam(3.0), 0.7, 1.0);
    for (const char *sg : {"++", "+-", "-+-"}) {
        const std::vector<Sign> signs = parse_signs(sg);
        const HookedBranch b = HookedBranch::canonical(prob, static_cast<int>(signs.size()), signs);
        const ArcCurve c = build_hooked(prob, b, 500);
        EXPECT_NEAR(c.length(), 1.0, 1e-12) << sg;
        EXPECT_NEAR(std::abs(c.displacement().x), 0.7, 1e-9) << sg;
        EXPECT_TRUE(verify_hooked_bc(c).pass) << sg;
    }
}

TEST(BoundaryConditions, BuiltCurvesPass) {
    for (double pv : {2.0, 3.0, 4.0})
        for (double ratio : {0.2, 0.6}) {
            const HookedProblem prob(PParam(pv), ratio, 1.0);
            for (int n : {1, 2}) {
                const ArcCurve c = build_hooked(prob, HookedBranch::canonical(prob, n), 800);
                const BcReport r = verify_hooked_bc(c);
                EXPECT_TRUE(r.pass) << pv << " " << ratio << " " << n << " k0=" << r.k0 << " kL=" << r.kL
                                    << " w'=" << r.wprimeL;
            }
        }
}

TEST(BoundaryConditions, SegmentFails) {
    EXPECT_FALSE(verify_hooked_bc(sample_segment(PParam(3.0), 1.0, 50)).pass);
}

TEST(BoundaryConditions, NonApexCutFails) {
    const PParam p(4.0);
    const Modulus q = solve_modulus(p, 0.2);
    const double K = p_comp_ellint_1(p, q);
    const ArcCurve c = sample_wavelike(p, q, K, 2.5 * K, 1000);
    EXPECT_FALSE(verify_hooked_bc(c).pass);
    EXPECT_TRUE(verify_hooked_bc(sample_wavelike(p, q, K, 2.0 * K, 1000)).pass);
}

TEST(BoundaryConditions, Mirror) {
    const HookedProblem prob(PParam(4.0), 0.5, 2.0);
    const ArcCurve c = build_hooked(prob, HookedBranch::canonical(prob, 2, parse_signs("+-")), 500);
    const ArcCurve m = mirror_hooked(c);
    EXPECT_NEAR(std::cos(m.front().theta), -1.0, 1e-8);
    EXPECT_NEAR(m.displacement().x, c.displacement().x, 1e-12);
    EXPECT_NEAR(m.length(), c.length(), 1e-14);
    EXPECT_TRUE(verify_hooked_bc(m, HookedEnd::initial).pass);
    EXPECT_FALSE(verify_hooked_bc(m, HookedEnd::terminal).pass);
    EXPECT_NEAR(bending_energy(m).value, bending_energy(c).value, 1e-9 * bending_energy(c).value);
}

TEST(Energy, JensenConstantOracle) {
    for (double pv : {3.0, 4.0, 8.0}) EXPECT_NEAR(jensen_constant(PParam(pv)) / oracle::jensen_C(pv), 1.0, 1e-10);
    EXPECT_NEAR(jensen_constant(PParam(4.0)), 74.69, 0.01);
    EXPECT_THROW(jensen_constant(PParam(2.0)), DomainError);
}

TEST(Energy, MinimalFlatcoreValue) {
    for (double ell : {1.0 / 3.0, 0.5, 0.9}) {
        const HookedProblem prob(PParam(4.0), ell, 1.0);
        EXPECT_NEAR(minimal_energy(prob), oracle::jensen_C(4.0) / std::pow(1.0 - ell, 3.0),
                    1e-10 * minimal_energy(prob));
    }
}

TEST(Energy, JensenBoundValues) {
    const PParam p(4.0);
    EXPECT_NEAR(jensen_bound(p, 2, 2.0, 1.0), 16.0 * oracle::jensen_C(4.0), 1e-9);
    EXPECT_NEAR(jensen_bound(p, 2, 2.0, 1.0), 1195.1, 0.2);
    const HookedProblem prob(p, 0.6, 1.0);
    EXPECT_NEAR(jensen_bound(p, 1, 1.0, 0.6), minimal_energy(prob), 1e-12 * minimal_energy(prob));
    EXPECT_THROW(jensen_bound(p, 0, 1.0, 0.5), DomainError);
    EXPECT_THROW(jensen_bound(p, 1, 1.0, 1.0), DomainError);
}

TEST(Energy, QuadratureMatchesMinimum) {
    for (double pv : {2.0, 4.0})
        for (double ratio : {0.1, 0.25, 0.6}) {
            const HookedProblem prob(PParam(pv), ratio, 1.0);
            const ArcCurve c = build_hooked(prob, HookedBranch::canonical(prob, 1), 2000);
            EXPECT_NEAR(bending_energy(c).value / minimal_energy(prob), 1.0, 1e-6) << pv << " " << ratio;
        }
}

TEST(Energy, HigherModesScale) {
    for (double pv : {2.0, 4.0})
        for (double ratio : {0.25, 0.6}) {
            const HookedProblem prob(PParam(pv), ratio, 1.0);
            const double E1 = minimal_energy(prob);
            double prev = 0.0;
            for (int n = 1; n <= 5; ++n) {
                const double En = hooked_energy(prob, n);
                EXPECT_GT(En, prev);
                EXPECT_NEAR(En / E1, std::pow(2.0 * n - 1.0, pv), 1e-8 * std::pow(2.0 * n - 1.0, pv));
                prev = En;
                const ArcCurve c = build_hooked(prob, HookedBranch::canonical(prob, n), 1000);
                EXPECT_NEAR(bending_energy(c).value / En, 1.0, 1e-6) << pv << " " << ratio << " " << n;
            }
        }
}

TEST(Energy, AlternatingFlatCoreEqualsBound) {
    const FlatCoreSpec spec = FlatCoreSpec::uniform(PParam(4.0), parse_signs("+-"), 0.5);
    const ArcCurve c = build_flat_core(spec, 2000);
    const double bound = jensen_bound(PParam(4.0), 4, c.length(), c.displacement().norm());
    EXPECT_NEAR(bending_energy(c).value / bound, 1.0, 1e-7);
}
