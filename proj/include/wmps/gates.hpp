#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "wmps/rng.hpp"
#include "wmps/tensor.hpp"

namespace wmps {

/// Unitary on one or two sites.
///
/// Basis ordering for two-site gates: the first entry of `sites` is the slow
/// index, so row/column `2*a + b` addresses |a>_{sites[0]} |b>_{sites[1]}. For
/// the weak-measurement coupling the register is (qubit, ancilla).
struct GateMatrix {
    Eigen::MatrixXcd         matrix;
    std::vector<std::size_t> sites;

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
};

using GateSequence = std::vector<GateMatrix>;

namespace qubit {
    inline constexpr std::size_t physical = 0;
    inline constexpr std::size_t ancilla  = 1;
}

/// Max-norm of U^dagger U - I.
double unitarity_error(const Eigen::MatrixXcd &u);

/// Haar-random d x d unitary: complex Ginibre matrix, QR, then columns
/// rephased so that R has a positive diagonal.
Eigen::MatrixXcd haar_unitary(std::size_t d, Rng &rng);

/// exp[i theta (1 + Z_q)/2 X_a] in the (qubit, ancilla) basis. Closed form: on
/// qubit |0> the ancilla block is cos(theta) I + i sin(theta) X; on |1> it is I.
/// Angles outside [0, pi/2] are accepted with a warning on stderr.
Eigen::Matrix4cd weak_measurement_gate(double theta);

/// Trapped-ion native form of the coupling: H_a, exp(i theta Z_a/2),
/// exp(i theta Z_a Z_q/2), H_a, in application order, on the register
/// (qubit = 0, ancilla = 1).
GateSequence native_decomposition(double theta);

/// Ordered product of a gate sequence on an `n_sites` register (site 0 slowest).
Eigen::MatrixXcd sequence_product(const GateSequence &seq, std::size_t n_sites);

/// Lift a one- or two-site gate to the full `n_sites` register.
Eigen::MatrixXcd embed(const GateMatrix &gate, std::size_t n_sites);

Eigen::Matrix4cd swap_gate();
Eigen::Matrix2cd hadamard();
Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_z();

/// exp(i angle Z).
Eigen::Matrix2cd z_rotation(double angle);
/// exp(i angle Z (x) Z).
Eigen::Matrix4cd zz_rotation(double angle);

/// Two-site gate as a rank-4 tensor with labels (out_left, out_right, in_left, in_right).
DenseTensor gate_tensor(const Eigen::Matrix4cd &gate, const Label &out_left, const Label &out_right,
                        const Label &in_left, const Label &in_right);

} // namespace wmps
