#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wmps {

struct OracleCase {
    std::size_t       n     = 0;
    double            theta = 0.0;
    std::vector<bool> measured;
    std::vector<int>  outcomes;
    double            mps_probability   = 0.0;
    double            dense_probability = 0.0;
    double            fidelity          = 0.0; // post-measurement MPS vs statevector
};

struct OracleReport {
    std::vector<OracleCase> cases;
    double                  max_probability_error = 0.0;
    double                  min_fidelity          = 1.0;
    std::size_t             completeness_checks   = 0;
    double                  max_completeness_error = 0.0; // |sum over all outcome strings - 1|
};

/// Compare the sweep sampler against the statevector on random states, random
/// angles in [0, pi/2], and random measurement masks. Outcomes are drawn from
/// the exact distribution and imposed on both paths without truncation. For
/// registers up to `completeness_max_n` qubits every outcome string of the
/// case's mask is also enumerated and its probabilities summed.
OracleReport run_oracle_check(std::size_t n_cases, std::uint64_t seed, std::size_t min_n = 2, std::size_t max_n = 8,
                              std::size_t completeness_max_n = 6);

} // namespace wmps
