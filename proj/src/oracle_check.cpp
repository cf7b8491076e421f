#include "wmps/oracle_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wmps/dense.hpp"
#include "wmps/mps.hpp"
#include "wmps/rng.hpp"
#include "wmps/sampler.hpp"

namespace wmps {

namespace {
    double mps_forced_probability(const DenseState &psi, const LayerPlan &plan, std::span<const int> outcomes,
                                  std::vector<cplx> *post = nullptr) {
        auto state = MpsState::from_dense(psi.amplitudes(), psi.qubits());
        try {
            const auto record = force_measurement_layer(state, plan, outcomes, no_truncation);
            if(post) *post = state.to_dense();
            return record.joint_probability();
        } catch(const std::runtime_error &) {
            return 0.0; // imposed branch below the measure-zero threshold
        }
    }
} // namespace

OracleReport run_oracle_check(std::size_t n_cases, std::uint64_t seed, std::size_t min_n, std::size_t max_n,
                              std::size_t completeness_max_n) {
    if(min_n < 1 || min_n > max_n || max_n > k_dense_max_qubits)
        throw std::invalid_argument("run_oracle_check: bad qubit range");
    Rng          rng(seed);
    OracleReport report;
    for(std::size_t c = 0; c < n_cases; ++c) {
        OracleCase oc;
        oc.n              = min_n + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_n - min_n + 1));
        oc.n              = std::min(oc.n, max_n);
        oc.theta          = rng.uniform() * std::numbers::pi / 2;
        const double p    = rng.uniform();
        const auto   psi  = DenseState::random(oc.n, rng);
        auto         plan = draw_layer_plan(oc.n, p, oc.theta, rng);
        oc.measured       = plan.measured;

        auto       dense  = psi;
        const auto record = dense_sample_weak_layer(dense, plan, rng);
        oc.outcomes       = record.outcomes();
        for(auto &o : oc.outcomes) o = std::max(o, 0);
        oc.dense_probability = dense_outcome_probability(psi, plan, oc.outcomes);

        std::vector<cplx> post;
        oc.mps_probability = mps_forced_probability(psi, plan, oc.outcomes, &post);
        oc.fidelity        = post.empty() ? 0.0 : fidelity(post, dense.amplitudes());

        report.max_probability_error =
            std::max(report.max_probability_error, std::abs(oc.mps_probability - oc.dense_probability));
        report.min_fidelity = std::min(report.min_fidelity, oc.fidelity);

        if(oc.n <= completeness_max_n) {
            std::vector<std::size_t> sites;
            for(std::size_t j = 0; j < oc.n; ++j)
                if(plan.measured[j]) sites.push_back(j);
            double total = 0.0;
            for(std::size_t bits = 0; bits < (std::size_t{1} << sites.size()); ++bits) {
                std::vector<int> outs(oc.n, 0);
                for(std::size_t k = 0; k < sites.size(); ++k) outs[sites[k]] = static_cast<int>((bits >> k) & 1U);
                total += mps_forced_probability(psi, plan, outs);
            }
            ++report.completeness_checks;
            report.max_completeness_error = std::max(report.max_completeness_error, std::abs(total - 1.0));
        }
        report.cases.push_back(std::move(oc));
    }
    return report;
}

} // namespace wmps
