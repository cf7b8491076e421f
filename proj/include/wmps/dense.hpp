#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wmps/circuit.hpp"
#include "wmps/rng.hpp"
#include "wmps/sampler.hpp"
#include "wmps/tensor.hpp"

namespace wmps {

inline constexpr std::size_t k_dense_max_qubits = 14;

/// Statevector of n qubits; qubit 0 is the most significant bit, matching
/// MPS site order.
class DenseState {
  public:
    explicit DenseState(std::size_t n); // |0...0>
    DenseState(std::vector<cplx> amplitudes, std::size_t n);

    static DenseState neel(std::size_t n);
    /// Normalized complex-Gaussian vector.
    static DenseState random(std::size_t n, Rng &rng);

    [[nodiscard]] std::size_t              qubits() const { return n_; }
    [[nodiscard]] const std::vector<cplx> &amplitudes() const { return amps_; }
    [[nodiscard]] std::vector<cplx>       &amplitudes() { return amps_; }
    [[nodiscard]] double                   norm() const;
    void                                   normalize();

  private:
    std::size_t       n_;
    std::vector<cplx> amps_;
};

/// Exact action of a 2^k x 2^k gate on `sites` (first site = slowest gate index).
void dense_apply_gate(DenseState &state, const Eigen::MatrixXcd &gate, std::span<const std::size_t> sites);

/// Couple one fresh |0> ancilla per measured site with the weak-measurement
/// unitary, project the ancillas onto `outcomes`, renormalize, and return the
/// joint Born probability. Ancillas are appended one site at a time; the
/// couplings act on disjoint ancillas and commute.
double dense_weak_measure_layer(DenseState &state, const LayerPlan &plan, std::span<const int> outcomes);

/// Born probability of `outcomes` without modifying the state.
double dense_outcome_probability(const DenseState &state, const LayerPlan &plan, std::span<const int> outcomes);

/// Sample ancilla outcomes site by site (u < P(0 | earlier) -> 0) and apply them.
MeasurementRecord dense_sample_weak_layer(DenseState &state, const LayerPlan &plan, Rng &rng);

/// P(qubit = 0).
double dense_marginal_zero(const DenseState &state, std::size_t site);

/// Von Neumann entropy (natural log) of the first `cut` qubits, from the
/// eigenvalues of the reduced density matrix.
double dense_entropy(const DenseState &state, std::size_t cut);

/// Same circuit as `run_trajectory`, with gates applied directly on the
/// statevector (the boundary gate needs no swaps) and outcomes sampled from
/// exact marginals. Consumes the random streams in the same order.
TrajectoryResult dense_run_trajectory(const CircuitConfig &config, std::uint64_t trajectory);

} // namespace wmps
