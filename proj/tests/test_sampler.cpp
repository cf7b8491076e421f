#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "wmps/dense.hpp"
#include "wmps/gates.hpp"
#include "wmps/oracle_check.hpp"
#include "wmps/sampler.hpp"

using namespace wmps;
using wmps::testing::random_mps;

namespace {
LayerPlan random_plan(std::size_t n, Rng &rng) {
    return draw_layer_plan(n, rng.uniform(), rng.uniform() * std::numbers::pi / 2, rng);
}
} // namespace

TEST(Sampler, SingleQubitOutcomeProbability) {
    // P(ancilla = 1) = |alpha|^2 sin^2(theta) for alpha|0> + beta|1>.
    Rng rng(1);
    for(int trial = 0; trial < 10; ++trial) {
        const double            a = rng.uniform();
        const Eigen::Vector2cd  q(std::sqrt(a), std::sqrt(1 - a) * std::exp(cplx(0, 1.3)));
        const double            theta = rng.uniform() * std::numbers::pi / 2;
        auto                    s     = MpsState::product(std::span(&q, 1));
        const int               one[1]{1};
        const auto              rec = force_measurement_layer(s, full_layer_plan(1, theta), one, no_truncation);
        EXPECT_NEAR(rec.joint_probability(), a * std::pow(std::sin(theta), 2), 1e-13);
    }
}

TEST(Sampler, ForcedJointProbabilityMatchesStatevector) {
    const auto report = run_oracle_check(60, 2024, 2, 8, 0);
    EXPECT_LE(report.max_probability_error, 1e-10);
    EXPECT_GE(report.min_fidelity, 1 - 1e-10);
}

TEST(Sampler, ForcedProbabilitiesSumToOne) {
    const auto report = run_oracle_check(30, 99, 2, 6, 6);
    EXPECT_EQ(report.completeness_checks, 30U);
    EXPECT_LE(report.max_completeness_error, 1e-9);
}

TEST(Sampler, SampledOutcomesFollowTheSameStreamAsTheStatevector) {
    // Both samplers draw one uniform per measured site from exact conditionals,
    // so with equal seeds they make identical choices.
    Rng setup(3);
    for(int trial = 0; trial < 20; ++trial) {
        const std::size_t n    = 2 + static_cast<std::size_t>(setup.uniform() * 7);
        auto              psi  = DenseState::random(n, setup);
        auto              mps  = MpsState::from_dense(psi.amplitudes(), n);
        const auto        plan = random_plan(n, setup);
        const auto        seed = setup.next_u64();
        Rng               r1(seed), r2(seed);
        const auto        a = sample_measurement_layer(mps, plan, r1, no_truncation);
        const auto        b = dense_sample_weak_layer(psi, plan, r2);
        ASSERT_EQ(a.outcomes(), b.outcomes());
        for(std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a.sites[i].probability, b.sites[i].probability, 1e-10);
        EXPECT_GT(fidelity(mps.to_dense(), psi.amplitudes()), 1 - 1e-10);
    }
}

TEST(Sampler, OutcomeFrequenciesMatchBornProbabilities) {
    Rng               rng(4);
    const std::size_t n     = 3;
    const auto        psi   = DenseState::random(n, rng);
    const auto        plan  = full_layer_plan(n, 0.9);
    const int         draws = 20000;
    std::vector<int>  counts(8, 0);
    for(int k = 0; k < draws; ++k) {
        auto       s   = MpsState::from_dense(psi.amplitudes(), n);
        const auto rec = sample_measurement_layer(s, plan, rng, no_truncation);
        const auto o   = rec.outcomes();
        ++counts[static_cast<std::size_t>(4 * o[0] + 2 * o[1] + o[2])];
    }
    for(int x = 0; x < 8; ++x) {
        const int    outs[3]{x >> 2, (x >> 1) & 1, x & 1};
        const double p  = dense_outcome_probability(psi, plan, outs);
        const double se = std::sqrt(p * (1 - p) / draws);
        EXPECT_NEAR(counts[static_cast<std::size_t>(x)] / static_cast<double>(draws), p, 4 * se + 1e-12) << x;
    }
}

TEST(Sampler, IdentityCouplingForUnmeasuredSitesIsEquivalent) {
    Rng rng(5);
    for(int trial = 0; trial < 10; ++trial) {
        const std::size_t n    = 6;
        auto              a    = random_mps(n, rng);
        auto              b    = a;
        const auto        plan = random_plan(n, rng);
        const auto        seed = rng.next_u64();
        Rng               r1(seed), r2(seed);
        const auto        ra = sample_measurement_layer(a, plan, r1, no_truncation);
        const auto        rb = sample_measurement_layer(b, plan, r2, no_truncation, {true, true});
        EXPECT_EQ(ra.outcomes(), rb.outcomes());
        EXPECT_NEAR(ra.joint_probability(), rb.joint_probability(), 1e-12);
        EXPECT_GT(fidelity(a.to_dense(), b.to_dense()), 1 - 1e-12);
    }
}

TEST(Sampler, ProjectiveLimitOnNeelIsDeterministic) {
    Rng  rng(6);
    auto s   = MpsState::neel(8);
    const auto rec = sample_measurement_layer(s, full_layer_plan(8, std::numbers::pi / 2), rng, {64, 1e-6});
    for(std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(rec.sites[i].outcome, i % 2 == 0 ? 1 : 0);
        EXPECT_NEAR(rec.sites[i].probability, 1.0, 1e-14);
    }
    for(std::size_t c = 1; c < 8; ++c) EXPECT_EQ(s.bond_entropy(c), 0.0);
}

TEST(Sampler, ImpossibleForcedOutcomeThrows) {
    auto             s = MpsState::neel(4);
    const std::vector<int> outs{0, 0, 1, 0};
    EXPECT_THROW(force_measurement_layer(s, full_layer_plan(4, std::numbers::pi / 2), outs, no_truncation),
                 std::runtime_error);
}

TEST(Sampler, RejectsMismatchedPlansAndOutcomes) {
    Rng  rng(7);
    auto s = MpsState::neel(4);
    EXPECT_THROW(sample_measurement_layer(s, full_layer_plan(5, 0.3), rng, no_truncation), std::invalid_argument);
    const std::vector<int> short_outs{0, 1};
    EXPECT_THROW(force_measurement_layer(s, full_layer_plan(4, 0.3), short_outs, no_truncation),
                 std::invalid_argument);
    const std::vector<int> bad{0, 2, 0, 0};
    EXPECT_THROW(force_measurement_layer(s, full_layer_plan(4, 0.3), bad, no_truncation), std::invalid_argument);
}

TEST(Sampler, RejectsUnnormalizedInput) {
    Rng  rng(8);
    auto s = random_mps(4, rng);
    s.scale_site(2, 2.0);
    EXPECT_THROW(sample_measurement_layer(s, full_layer_plan(4, 0.3), rng, no_truncation), std::invalid_argument);
}

TEST(Sampler, SweepCostIsLinearInSites) {
    Rng                        rng(9);
    std::vector<std::uint64_t> counts;
    for(std::size_t n : {8U, 12U, 16U}) {
        auto s = MpsState::neel(n);
        reset_contraction_count();
        sample_measurement_layer(s, full_layer_plan(n, 0.5), rng, no_truncation);
        counts.push_back(contraction_count());
    }
    EXPECT_EQ(counts[2] - counts[1], counts[1] - counts[0]);
}

TEST(Sampler, RightIsometryHoldsDuringSweep) {
    Rng  rng(10);
    auto s = random_mps(6, rng);
    EXPECT_NO_THROW(sample_measurement_layer(s, full_layer_plan(6, 0.7), rng, no_truncation, {false, true}));
}

TEST(Sampler, LayerPlanMaskRespectsProbability) {
    Rng rng(11);
    EXPECT_EQ(draw_layer_plan(20, 0.0, 0.1, rng).measured_count(), 0U);
    EXPECT_EQ(draw_layer_plan(20, 1.0, 0.1, rng).measured_count(), 20U);
    std::size_t total = 0;
    for(int k = 0; k < 1000; ++k) total += draw_layer_plan(10, 0.33, 0.1, rng).measured_count();
    EXPECT_NEAR(total / 10000.0, 0.33, 4 * std::sqrt(0.33 * 0.67 / 10000));
}

TEST(Sampler, AncillaDensityMatrixIsNormalizedAndHermitian) {
    Rng               rng(12);
    const auto        a = wmps::testing::random_tensor({"a", "r"}, {2, 3}, rng);
    const auto        p = contract(a, a.conj().relabeled({{"a", "ac"}, {"r", "rc"}}));
    const auto        rho = ancilla_rdm(p);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
    EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Born, BellPairOutcomesAreCorrelated) {
    std::vector<cplx> bell(4, 0.0);
    bell[0] = bell[3] = 1 / std::numbers::sqrt2;
    Rng rng(13);
    for(int k = 0; k < 20; ++k) {
        auto       s     = MpsState::from_dense(bell, 2);
        const auto first = born_projective_measure(s, 0, rng);
        EXPECT_NEAR(first.probability, 0.5, 1e-14);
        const auto second = born_projective_measure(s, 1, rng);
        EXPECT_EQ(second.outcome, first.outcome);
        EXPECT_NEAR(second.probability, 1.0, 1e-14);
    }
}

TEST(Born, ProjectiveLimitOfWeakMeasurementMatchesBornRule) {
    // At theta = pi/2 the ancilla reads 1 exactly when the qubit is 0.
    Rng rng(14);
    for(int trial = 0; trial < 10; ++trial) {
        const std::size_t n    = 5;
        const auto        psi  = DenseState::random(n, rng);
        const auto        plan = draw_layer_plan(n, 0.6, std::numbers::pi / 2, rng);
        std::vector<int>  qubits(n, 0), ancillas(n, 0);
        for(std::size_t i = 0; i < n; ++i) {
            qubits[i]   = rng.uniform() < 0.5 ? 0 : 1;
            ancillas[i] = 1 - qubits[i];
        }
        auto   born = MpsState::from_dense(psi.amplitudes(), n);
        double p    = 1.0;
        for(std::size_t i = 0; i < n; ++i)
            if(plan.measured[i]) p *= born_projective_measure(born, i, rng, qubits[i]).probability;
        EXPECT_NEAR(p, dense_outcome_probability(psi, plan, ancillas), 1e-12);
    }
}

TEST(Born, LayerLeavesNormalizedCanonicalState) {
    Rng  rng(15);
    auto s   = random_mps(6, rng);
    auto rec = born_measure_layer(s, full_layer_plan(6, std::numbers::pi / 2), rng, no_truncation);
    EXPECT_NEAR(s.global_norm(), 1.0, 1e-12);
    EXPECT_TRUE(s.is_canonical(1e-10));
    EXPECT_EQ(s.max_bond_dim(), 1U);
    EXPECT_EQ(rec.sites.size(), 6U);
}
