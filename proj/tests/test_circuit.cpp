#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wmps/circuit.hpp"
#include "wmps/dense.hpp"

using namespace wmps;

namespace {
CircuitConfig exact_config(std::size_t n, double theta, double p, LayerOrder order = LayerOrder::UMUM) {
    CircuitConfig c;
    c.n_qubits    = n;
    c.theta       = theta;
    c.p           = p;
    c.chi_max     = 1 << 12;
    c.cutoff      = 0.0;
    c.t_max       = 6;
    c.t_cutoff    = 3;
    c.master_seed = 77;
    c.order       = order;
    return c;
}
} // namespace

TEST(Circuit, MpsTrajectoryMatchesStatevectorTrajectory) {
    for(std::size_t n : {4U, 6U, 8U})
        for(auto order : {LayerOrder::UMUM, LayerOrder::UUMM})
            for(double p : {1.0, 0.5}) {
                const auto c  = exact_config(n, std::numbers::pi / 5, p, order);
                for(std::uint64_t traj = 0; traj < 3; ++traj) {
                    const auto mps   = run_trajectory(c, traj);
                    const auto dense = dense_run_trajectory(c, traj);
                    ASSERT_EQ(mps.records.size(), dense.records.size());
                    for(std::size_t k = 0; k < mps.records.size(); ++k)
                        ASSERT_EQ(mps.records[k].record.outcomes(), dense.records[k].record.outcomes());
                    for(std::size_t t = 0; t < c.t_max; ++t) {
                        EXPECT_NEAR(mps.s_left[t], dense.s_left[t], 1e-8);
                        EXPECT_NEAR(mps.s_right[t], dense.s_right[t], 1e-8);
                    }
                }
            }
}

TEST(Circuit, ProjectiveLimitGivesZeroEntropyEveryStep) {
    auto c           = exact_config(8, std::numbers::pi / 2, 1.0);
    c.t_max          = 10;
    const auto r     = run_trajectory(c, 0);
    for(double s : r.s_mean) EXPECT_EQ(s, 0.0);
}

TEST(Circuit, ZeroAngleNeverFlipsAnAncilla) {
    const auto c = exact_config(6, 0.0, 1.0);
    const auto r = run_trajectory(c, 1);
    for(const auto &lr : r.records)
        for(const auto &s : lr.record.sites) {
            EXPECT_EQ(s.outcome, 0);
            EXPECT_NEAR(s.probability, 1.0, 1e-12);
        }
}

TEST(Circuit, TrajectoriesAreReproducibleAndDistinct) {
    const auto c = exact_config(6, std::numbers::pi / 6, 1.0);
    const auto a = run_trajectory(c, 4);
    const auto b = run_trajectory(c, 4);
    const auto d = run_trajectory(c, 5);
    EXPECT_EQ(a.s_mean, b.s_mean);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_NE(a.s_mean, d.s_mean);
    EXPECT_NE(a.seed, d.seed);
}

TEST(Circuit, SeedGroupControlsSharedSeeds) {
    auto c1       = exact_config(6, 0.4, 1.0);
    auto c2       = c1;
    c2.chi_max    = 16;
    EXPECT_EQ(trajectory_seed(c1, 3), trajectory_seed(c2, 3));
    c2.seed_group = 1;
    EXPECT_NE(trajectory_seed(c1, 3), trajectory_seed(c2, 3));
}

TEST(Circuit, StepAppliesBrickwallWithPeriodicBoundary) {
    for(std::size_t n : {4U, 8U}) {
        auto          c     = exact_config(n, 0.3, 1.0);
        auto          state = MpsState::neel(n);
        TrajectoryRng rng(1);
        StepOptions   opts;
        opts.capture_gates = true;
        const auto log     = time_step(state, 1, rng, c, opts);
        EXPECT_EQ(log.unitary_count, n);
        EXPECT_EQ(log.swap_count, 2 * (n - 2));
        ASSERT_EQ(log.gates.size(), n);
        EXPECT_EQ(log.gates[0].site_a, 0U);
        EXPECT_EQ(log.gates[n / 2].site_a, 1U);
        EXPECT_EQ(log.gates.back().site_a, n - 1);
        EXPECT_EQ(log.gates.back().site_b, 0U);
        EXPECT_EQ(log.plans.size(), 2U);

        c.periodic = false;
        const auto open = time_step(state, 2, rng, c);
        EXPECT_EQ(open.unitary_count, n - 1);
        EXPECT_EQ(open.swap_count, 0U);
    }
}

TEST(Circuit, InjectedIdentityGatesKeepProductState) {
    const auto    c     = exact_config(6, 0.8, 1.0);
    auto          state = MpsState::neel(6);
    TrajectoryRng rng(2);
    StepOptions   opts;
    opts.unitary_source = [] { return Eigen::Matrix4cd::Identity().eval(); };
    time_step(state, 1, rng, c, opts);
    EXPECT_EQ(state.max_bond_dim(), 1U);
}

TEST(Circuit, ForcedOutcomesAreImposed) {
    const auto                    c     = exact_config(4, 0.6, 1.0);
    auto                          state = MpsState::neel(4);
    TrajectoryRng                 rng(3);
    std::vector<std::vector<int>> forced{{0, 0, 0, 0}, {0, 0, 0, 0}};
    StepOptions                   opts;
    opts.forced_outcomes = &forced;
    const auto log       = time_step(state, 1, rng, c, opts);
    for(const auto &r : log.records) EXPECT_EQ(r.outcomes(), (std::vector<int>{0, 0, 0, 0}));
}

TEST(Circuit, ValidationRejectsBadConfigs) {
    CircuitConfig c;
    c.n_qubits = 7;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c          = {};
    c.p        = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c          = {};
    c.t_cutoff = 40;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c         = {};
    c.chi_max = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Circuit, LongTimeAverageWindow) {
    TrajectoryResult r;
    r.s_mean = {1.0, 2.0, 3.0, 4.0, 5.0};
    EXPECT_DOUBLE_EQ(long_time_entropy(r, 4), 4.5);
    EXPECT_DOUBLE_EQ(long_time_entropy(r, 1), 3.0);
    EXPECT_THROW((void)long_time_entropy(r, 6), std::invalid_argument);
    std::vector<TrajectoryResult> ens{r, r};
    ens[1].s_mean = {0, 0, 0, 0, 1.0};
    EXPECT_DOUBLE_EQ(long_time_entropy(ens, 5), 3.0);
}

TEST(Circuit, EnumParsing) {
    EXPECT_EQ(parse_layer_order("UUMM"), LayerOrder::UUMM);
    EXPECT_EQ(parse_measurement_method("born"), MeasurementMethod::born);
    EXPECT_THROW((void)parse_layer_order("MUMU"), std::invalid_argument);
    EXPECT_EQ(to_string(LayerOrder::UMUM), "UMUM");
}

TEST(Circuit, BornMethodRunsAndStaysNormalized) {
    auto c   = exact_config(8, std::numbers::pi / 2, 0.33);
    c.method = MeasurementMethod::born;
    const auto r = run_trajectory(c, 0);
    EXPECT_EQ(r.s_mean.size(), c.t_max);
    for(double s : r.s_mean) EXPECT_GE(s, 0.0);
}
