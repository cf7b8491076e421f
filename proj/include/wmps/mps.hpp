#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wmps/tensor.hpp"

namespace wmps {

struct TruncationParams {
    std::size_t chi_max = 1000;
    double      cutoff  = 1e-6;
};

inline constexpr TruncationParams no_truncation{std::numeric_limits<std::size_t>::max(), 0.0};

/// Open-boundary MPS of qubits.
///
/// Every site tensor carries the labels ("l", "p", "r") in that order, with
/// extent-1 boundary links. Site 0 is the slowest index of the dense vector.
/// Cuts are numbered 1..N-1: cut c separates sites [0, c) from [c, N).
class MpsState {
  public:
    explicit MpsState(std::vector<DenseTensor> sites, std::optional<std::size_t> ortho_center = std::nullopt);

    static MpsState neel(std::size_t n);
    static MpsState product(std::span<const Eigen::Vector2cd> qubits);
    static MpsState from_dense(std::span<const cplx> amplitudes, std::size_t n);

    [[nodiscard]] std::size_t                size() const { return sites_.size(); }
    [[nodiscard]] const DenseTensor         &site(std::size_t i) const { return sites_.at(i); }
    [[nodiscard]] std::optional<std::size_t> ortho_center() const { return center_; }

    /// Replace one site tensor. Drops the orthogonality center.
    void set_site(std::size_t i, DenseTensor t);
    /// Replace the center tensor; every other site stays isometric, so the
    /// center is kept.
    void set_center_site(DenseTensor t);

    void canonicalize(std::size_t center);

    /// Unitary on one site; keeps the canonical form.
    void apply_single_site_gate(const Eigen::Matrix2cd &gate, std::size_t site);

    /// Gate on (left, left+1), SVD-truncated at that bond and renormalized.
    /// Leaves the orthogonality center on left+1. Returns the discarded weight.
    double apply_two_site_gate(const Eigen::Matrix4cd &gate, std::size_t left, const TruncationParams &params);

    /// Gate with its first qubit on `site_a` and second on `site_b`, for any
    /// pair. Non-adjacent pairs are routed by moving the lower site's content up
    /// to the neighbour of the higher one with SWAPs, then swapping back.
    /// Returns the number of SWAP gates applied.
    std::size_t apply_gate_with_swaps(const Eigen::Matrix4cd &gate, std::size_t site_a, std::size_t site_b,
                                      const TruncationParams &params);

    [[nodiscard]] std::vector<double> schmidt_values(std::size_t cut);

    /// -sum s^2 ln s^2 over normalized Schmidt values at the cut.
    [[nodiscard]] double bond_entropy(std::size_t cut);

    [[nodiscard]] double            global_norm() const;
    [[nodiscard]] std::vector<cplx> to_dense() const;

    [[nodiscard]] std::size_t bond_dim(std::size_t cut) const;
    [[nodiscard]] std::size_t max_bond_dim() const;

    [[nodiscard]] double left_isometry_error(std::size_t i) const;
    [[nodiscard]] double right_isometry_error(std::size_t i) const;
    /// True if the stored center is set and every other site is isometric toward it.
    [[nodiscard]] bool is_canonical(double tol = 1e-8) const;

    /// Multiply one site by a scalar. A non-unimodular factor away from the
    /// center drops the center.
    void scale_site(std::size_t i, cplx factor);

    /// Rebuild the canonical form from scratch (QR left-to-right, then a
    /// truncating SVD sweep right-to-left), leaving the center on site 0 and the
    /// state normalized. Returns the norm measured before renormalizing.
    double compress(const TruncationParams &params);

    /// Sum of discarded weights over all truncations applied to this state.
    [[nodiscard]] double truncation_error() const { return truncation_error_; }

  private:
    std::vector<DenseTensor>   sites_;
    std::optional<std::size_t> center_;
    double                     truncation_error_ = 0.0;

    void move_center_right(std::size_t k);
    void move_center_left(std::size_t k);
    void check_site(std::size_t i) const;
};

/// Free-function forms of the common constructors and queries.
inline MpsState neel_state(std::size_t n) { return MpsState::neel(n); }

/// |<a|b>|^2 / (<a|a><b|b>).
double fidelity(std::span<const cplx> a, std::span<const cplx> b);

/// Debug/golden snapshot: JSON with per-site labels, dims, and re/im arrays.
void     write_snapshot(std::ostream &os, const MpsState &state);
MpsState read_snapshot(std::istream &is);

} // namespace wmps
