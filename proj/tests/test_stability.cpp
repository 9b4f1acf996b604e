#include <pelastica/stability.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

using namespace pelastica;

namespace {

constexpr double kPi = std::numbers::pi;

FlatCoreSpec alternating_spec(int N, double r = 0.5) {
    std::vector<Sign> signs;
    for (int j = 0; j < N; ++j) signs.push_back(j % 2 ? Sign::minus : Sign::plus);
    return FlatCoreSpec::uniform(PParam(4.0), signs, r);
}

FlatCoreSpec endpoint_loop_spec() {
    const PParam p(4.0);
    return FlatCoreSpec::from_lengths(p, {Sign::plus}, {0.0, FlatCoreSpec::required_flat_sum(p, 1, 0.5)});
}

DiscreteCurve random_state(PParam p, std::size_t M, std::mt19937_64 &rng) {
    std::normal_distribution<double> step(0.0, 0.3);
    std::vector<double> t(M);
    double acc = 0.0;
    for (double &x : t) x = (acc += step(rng));
    return DiscreteCurve(t, 1.0 / static_cast<double>(M), p);
}

}  // namespace

TEST(Discretize, SegmentIsStraight) {
    const DiscreteCurve dc = discretize(sample_segment(PParam(3.0), 2.0, 50), 40);
    for (double t : dc.thetas) EXPECT_NEAR(t, kPi, 1e-15);
    EXPECT_NEAR(dc.length(), 2.0, 1e-14);
    EXPECT_THROW(discretize(sample_segment(PParam(3.0), 2.0, 50), 2), DomainError);
}

TEST(Discretize, DisplacementConvergesLinearlyOrBetter) {
    const ArcCurve c = build_flat_core(alternating_spec(2), 1000);
    double prev = INFINITY;
    for (std::size_t M : {200u, 400u, 800u}) {
        const DiscreteCurve dc = discretize(c, M);
        const double gap = (dc.displacement() - c.displacement()).norm();
        EXPECT_LE(gap, 10.0 * dc.h) << M;
        if (std::isfinite(prev)) {
            EXPECT_GE(std::log2(prev / gap), 1.0) << M;
        }
        prev = gap;
    }
}

TEST(Energy, ConstantAnglesHaveZeroEnergy) {
    const DiscreteCurve dc(std::vector<double>(20, 0.3), 0.1, PParam(3.0));
    const EnergyGrad eg = discrete_energy_grad(dc);
    EXPECT_EQ(eg.E, 0.0);
    for (double g : eg.grad) EXPECT_EQ(g, 0.0);
}

TEST(Energy, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(12345);
    for (double pv : {2.5, 3.0, 4.0}) {
        const PParam p(pv);
        for (int trial = 0; trial < 50; ++trial) {
            DiscreteCurve dc = random_state(p, 30, rng);
            const EnergyGrad eg = discrete_energy_grad(dc);
            EXPECT_NEAR(eg.E, discrete_energy(dc), 1e-12 * eg.E);
            double gnorm = 0.0, err = 0.0;
            for (std::size_t i = 0; i < dc.M(); ++i) {
                const double t0 = dc.thetas[i];
                const double d = 1e-6 * std::max(1.0, std::abs(t0));
                dc.thetas[i] = t0 + d;
                const double Ep = discrete_energy(dc);
                dc.thetas[i] = t0 - d;
                const double Em = discrete_energy(dc);
                dc.thetas[i] = t0;
                const double fd = (Ep - Em) / (2 * d);
                err = std::max(err, std::abs(fd - eg.grad[i]));
                gnorm = std::max(gnorm, std::abs(eg.grad[i]));
            }
            EXPECT_LE(err, 1e-6 * gnorm) << "p=" << pv << " trial " << trial;
        }
    }
}

TEST(Energy, Homogeneity) {
    std::mt19937_64 rng(7);
    const DiscreteCurve dc = random_state(PParam(3.0), 25, rng);
    DiscreteCurve scaled = dc;
    for (std::size_t i = 0; i < dc.M(); ++i) scaled.thetas[i] = dc.thetas[0] + 2.0 * (dc.thetas[i] - dc.thetas[0]);
    EXPECT_NEAR(discrete_energy(scaled) / discrete_energy(dc), 8.0, 1e-12);
}

TEST(Energy, FlatCoreConvergesToClosedForm) {
    const FlatCoreSpec spec = alternating_spec(1);
    const ArcCurve c = build_flat_core(spec, 1000);
    const double E = jensen_bound(spec.p, 2, c.length(), c.displacement().norm());
    double prev = INFINITY;
    for (std::size_t M : {200u, 400u, 800u}) {
        const double err = std::abs(discrete_energy(discretize(c, M)) - E) / E;
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LE(prev, 1e-3);
}

TEST(Projection, FeasibleStateUnchanged) {
    const DiscreteCurve dc = discretize(build_flat_core(alternating_spec(1), 500), 200);
    const Vec2 d = dc.displacement();
    const DiscreteCurve out = project_constraints(dc, {d.x, d.y});
    for (std::size_t i = 0; i < dc.M(); ++i) EXPECT_NEAR(out.thetas[i], dc.thetas[i], 1e-12);
}

TEST(Projection, ReachesConstraintAndIsLipschitz) {
    const DiscreteCurve dc = discretize(build_flat_core(alternating_spec(2), 500), 300);
    const Vec2 d = dc.displacement();
    const PinnedConstraint c{d.x, d.y};
    double prev_ratio = -1.0;
    for (double eps : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        DiscreteCurve moved = dc;
        for (std::size_t i = 0; i < dc.M(); ++i) moved.thetas[i] += eps * std::sin(7.0 * i / dc.M() + 0.3);
        const DiscreteCurve out = project_constraints(moved, c);
        EXPECT_LE(feasibility_residual(out, c), 1e-10);
        double shift = 0.0;
        for (std::size_t i = 0; i < dc.M(); ++i) shift = std::max(shift, std::abs(out.thetas[i] - moved.thetas[i]));
        const double ratio = shift / eps;
        EXPECT_LE(ratio, 10.0);
        if (prev_ratio > 0.0) {
            EXPECT_NEAR(ratio, prev_ratio, 0.1 * prev_ratio + 1e-3);
        }
        prev_ratio = ratio;
    }
}

TEST(Projection, RejectsUnreachableChord) {
    const DiscreteCurve dc(std::vector<double>(10, 0.0), 0.1, PParam(3.0));
    EXPECT_THROW(project_constraints(dc, {2.0, 0.0}), DomainError);
}

TEST(Perturb, ZeroIsIdentity) {
    const DiscreteCurve dc = discretize(build_flat_core(alternating_spec(1), 500), 100);
    const DiscreteCurve out = perturb(dc, 0.0, 5);
    EXPECT_EQ(out.thetas, dc.thetas);
    EXPECT_THROW(perturb(dc, -1.0, 5), DomainError);
}

TEST(Perturb, DeterministicAndBounded) {
    const DiscreteCurve dc = discretize(build_flat_core(alternating_spec(1), 500), 400);
    const Vec2 d = dc.displacement();
    EXPECT_EQ(perturb(dc, 0.02, 9).thetas, perturb(dc, 0.02, 9).thetas);
    EXPECT_NE(perturb(dc, 0.02, 9).thetas, perturb(dc, 0.02, 10).thetas);
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DiscreteCurve out = perturb(dc, 0.02, seed);
        EXPECT_LE(feasibility_residual(out, {d.x, d.y}), 1e-10);
        double dev = 0.0;
        for (std::size_t i = 0; i < dc.M(); ++i) dev = std::max(dev, std::abs(out.thetas[i] - dc.thetas[i]));
        worst = std::max(worst, dev);
    }
    EXPECT_LE(worst, 0.04);
    EXPECT_GT(worst, 0.01);
}

TEST(Descent, RelaxedStateIsFixedPoint) {
    ProbeOptions opt;
    const ProbeReference ref = probe_reference(alternating_spec(1), 200, opt);
    ASSERT_TRUE(ref.converged);
    const DescentResult again = descend(ref.curve, ref.constraint, opt.descent);
    EXPECT_NEAR(again.E_final, ref.E, 1e-8);
    double dev = 0.0;
    for (std::size_t i = 0; i < ref.curve.M(); ++i)
        dev = std::max(dev, std::abs(again.curve.thetas[i] - ref.curve.thetas[i]));
    EXPECT_LE(dev, 1e-3);
}

TEST(Descent, MonotoneAndFeasible) {
    const ProbeReference ref = probe_reference(alternating_spec(2), 200);
    const DiscreteCurve start = perturb(ref.curve, 0.05, 3);
    double prev = discrete_energy(start);
    double worst_res = 0.0;
    int steps = 0;
    const DescentResult res = descend(start, ref.constraint, {}, [&](const DiscreteCurve &dc, double E) {
        EXPECT_LE(E, prev);
        EXPECT_NEAR(E, discrete_energy(dc), 1e-10 * E);
        prev = E;
        worst_res = std::max(worst_res, feasibility_residual(dc, ref.constraint));
        ++steps;
    });
    EXPECT_GT(steps, 0);
    EXPECT_LE(worst_res, 1e-9);
    EXPECT_FALSE(res.line_search_failed);
    EXPECT_THROW(descend(start, ref.constraint, DescentOptions{.max_iter = -1}), DomainError);
}

TEST(Descent, EndpointLoopDescendsBelowReference) {
    // Larger perturbations leave the basin of the endpoint-loop state.
    ProbeOptions opt;
    const ProbeReport rep = probe_stability(endpoint_loop_spec(), 0.1, 20, 400, opt);
    double best = INFINITY;
    for (const SeedOutcome &s : rep.seeds) best = std::min(best, s.E_final);
    EXPECT_LT(best, rep.E_ref);
    EXPECT_EQ(rep.verdict, Verdict::instability_witness);
}

TEST(Probe, AlternatingSingleLoopStable) {
    const ProbeReport rep = probe_stability(alternating_spec(1), 0.02, 20, 400);
    EXPECT_EQ(rep.verdict, Verdict::stable_consistent);
    EXPECT_TRUE(rep.reference_converged);
    for (const SeedOutcome &s : rep.seeds) {
        EXPECT_GE(s.E_final, rep.E_ref * (1 - 1e-3));
        EXPECT_LE(s.sup_dev, 0.1);
        EXPECT_EQ(s.bound_failures, 0);
    }
}

TEST(Probe, ZeroPerturbationReturnsReference) {
    const ProbeReport rep = probe_stability(alternating_spec(2), 0.0, 3, 200);
    for (const SeedOutcome &s : rep.seeds) {
        EXPECT_NEAR(s.E_final, rep.E_ref, 1e-10 * rep.E_ref);
        EXPECT_LE(s.sup_dev, 1e-10);
    }
}

TEST(Probe, SerialAndParallelAgree) {
    ProbeOptions a, b;
    b.parallel = false;
    a.descent.max_iter = b.descent.max_iter = 30;
    const ProbeReport ra = probe_stability(alternating_spec(1), 0.02, 3, 120, a);
    const ProbeReport rb = probe_stability(alternating_spec(1), 0.02, 3, 120, b);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(ra.seeds[i].E_final, rb.seeds[i].E_final);
}

TEST(Probe, TrajectoryRecorded) {
    ProbeOptions opt;
    opt.record_trajectory = true;
    opt.descent.max_iter = 20;
    const ProbeReport rep = probe_stability(alternating_spec(1), 0.02, 2, 120, opt);
    for (const SeedOutcome &s : rep.seeds) {
        ASSERT_FALSE(s.trajectory.empty());
        EXPECT_EQ(s.trajectory.front(), s.E_start);
        EXPECT_EQ(s.trajectory.back(), s.E_final);
    }
}

TEST(Probe, JudgeThresholds) {
    ProbeReport r;
    r.E_ref = 100.0;
    SeedOutcome s;
    s.E_final = 99.95;
    s.sup_dev = 0.05;
    r.seeds = {s};
    EXPECT_EQ(judge(r, {}), Verdict::stable_consistent);
    r.seeds[0].sup_dev = 0.2;
    EXPECT_EQ(judge(r, {}), Verdict::inconclusive);
    r.seeds[0].E_final = 94.0;
    EXPECT_EQ(judge(r, {}), Verdict::instability_witness);
    EXPECT_EQ(to_string(Verdict::stable_consistent), "stable-consistent");
    EXPECT_THROW(probe_stability(alternating_spec(1), 0.02, 0, 100), DomainError);
}

TEST(Partition, ExactDiscretization) {
    for (int N : {1, 2, 3}) {
        const FlatCoreSpec spec = alternating_spec(N);
        const ArcCurve c = build_flat_core(spec, 1000);
        const DiscreteCurve dc = discretize(c, 800);
        const PartitionReport r = partition_and_bound(dc, N);
        EXPECT_EQ(r.pieces.size(), static_cast<std::size_t>(2 * N));
        EXPECT_EQ(r.cuts.size(), static_cast<std::size_t>(2 * N - 1));
        EXPECT_TRUE(r.ratios_ok);
        EXPECT_TRUE(r.bound_ok);
        EXPECT_NEAR(r.energy_sum / r.bound, 1.0, 5e-3) << N;
        EXPECT_NEAR(r.energy_sum, discrete_energy(dc), 1e-10 * r.energy_sum);
    }
}

TEST(Partition, HoldsAlongDescent) {
    const int N = 2;
    const ProbeReference ref = probe_reference(alternating_spec(N), 400);
    const DiscreteCurve start = perturb(ref.curve, 0.02, 1);
    const double tol = 1e-3 * ref.E;
    int checked = 0;
    descend(start, ref.constraint, {}, [&](const DiscreteCurve &dc, double) {
        try {
            const PartitionReport r = partition_and_bound(dc, N, tol);
            ++checked;
            EXPECT_TRUE(r.bound_ok) << "sum " << r.energy_sum << " bound " << r.bound;
        } catch (const DomainError &) {
        }
    });
    EXPECT_GT(checked, 0);
}

TEST(Partition, SegmentUnavailable) {
    const DiscreteCurve dc = discretize(sample_segment(PParam(4.0), 1.0, 10), 50);
    try {
        partition_and_bound(dc, 1);
        FAIL() << "expected DomainError";
    } catch (const DomainError &e) {
        EXPECT_NE(std::string(e.what()).find("partition unavailable"), std::string::npos);
    }
}
