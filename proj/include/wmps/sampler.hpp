#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wmps/mps.hpp"
#include "wmps/rng.hpp"
#include "wmps/tensor.hpp"

namespace wmps {

/// Which sites are weakly measured in one layer, and how strongly.
struct LayerPlan {
    std::vector<bool> measured;
    double            theta = 0.0;

    [[nodiscard]] std::size_t size() const { return measured.size(); }
    [[nodiscard]] std::size_t measured_count() const;
};

/// I.i.d. Bernoulli(p) mask, drawn for sites 0..n-1 in order.
LayerPlan draw_layer_plan(std::size_t n, double p, double theta, Rng &rng);
LayerPlan full_layer_plan(std::size_t n, double theta);

struct SiteOutcome {
    bool   measured    = false;
    int    outcome     = -1;  // ancilla result, -1 when unmeasured
    double probability = 1.0; // conditional on all outcomes to the left
};

struct MeasurementRecord {
    std::vector<SiteOutcome> sites;

    [[nodiscard]] double           joint_probability() const;
    [[nodiscard]] std::vector<int> outcomes() const;
};

struct SamplerOptions {
    /// Run unmeasured sites through an identity coupling instead of passing
    /// the environment straight through. Both give the same distribution.
    bool identity_coupling_for_unmeasured = false;
    /// Assert right-isometry of every site to the right of the sweep position.
    /// Quadratic cost; for tests.
    bool check_right_isometry = false;
};

/// Sample one layer of weak measurements by a single left-to-right sweep.
///
/// With the orthogonality center on site 0, the ancilla of site i is coupled
/// in with the weak-measurement unitary, the physical index is traced against the
/// conjugate, and the left environment carrying all earlier outcomes is
/// absorbed. Tracing the right links then gives the ancilla's conditional
/// density matrix; an outcome is drawn and the environment is projected onto
/// it before moving on. After the sweep each coupled site tensor is projected
/// onto its outcome and the state is renormalized and recompressed.
MeasurementRecord sample_measurement_layer(MpsState &state, const LayerPlan &plan, Rng &rng,
                                           const TruncationParams &params, const SamplerOptions &opts = {});

/// Same sweep with the outcomes imposed (entries for unmeasured sites are
/// ignored). The record holds the exact conditional probabilities. Throws if
/// any imposed outcome has conditional probability below 1e-12.
MeasurementRecord force_measurement_layer(MpsState &state, const LayerPlan &plan, std::span<const int> outcomes,
                                          const TruncationParams &params, const SamplerOptions &opts = {});

/// Normalized 2x2 ancilla density matrix from an environment-absorbed tensor
/// with labels (a, ac, r, rc) in any order: rho(a, ac) = sum_r P(a, r, ac, r).
Eigen::Matrix2cd ancilla_rdm(const DenseTensor &p);

struct BornOutcome {
    int    outcome     = 0; // physical qubit value
    double probability = 1.0;
};

/// Projective Z measurement of one physical qubit by the Born rule. Leaves the
/// center on `site`. With `forced` >= 0 that outcome is imposed.
BornOutcome born_projective_measure(MpsState &state, std::size_t site, Rng &rng, int forced = -1);

/// Projective measurement of every site in the plan, left to right, followed
/// by recompression. The record stores physical outcomes, not ancilla bits.
MeasurementRecord born_measure_layer(MpsState &state, const LayerPlan &plan, Rng &rng,
                                     const TruncationParams &params);

} // namespace wmps
