#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wmps {

using cplx  = std::complex<double>;
using Label = std::string;

using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace tol {
    inline constexpr double isometry               = 1e-10;
    inline constexpr double reconstruction_slack   = 1e-12;
    inline constexpr double relative_zero_singular = 1e-14;
}

/// Dense complex tensor with named indices.
///
/// Storage is row-major over the label order: the last label varies fastest.
/// Every reshape or transpose goes through `permuted`, so the linear layout of
/// any tensor is a pure function of its label order.
class DenseTensor {
  public:
    DenseTensor() = default;
    DenseTensor(std::vector<Label> labels, std::vector<std::size_t> dims);
    DenseTensor(std::vector<Label> labels, std::vector<std::size_t> dims, std::vector<cplx> data);

    static DenseTensor scalar(cplx value);
    static DenseTensor from_matrix(const RowMatrix &m, std::vector<Label> labels, std::vector<std::size_t> dims);

    [[nodiscard]] std::size_t                     rank() const { return labels_.size(); }
    [[nodiscard]] std::size_t                     size() const { return data_.size(); }
    [[nodiscard]] const std::vector<Label>       &labels() const { return labels_; }
    [[nodiscard]] const std::vector<std::size_t> &dims() const { return dims_; }
    [[nodiscard]] const std::vector<cplx>        &data() const { return data_; }
    [[nodiscard]] std::vector<cplx>              &data() { return data_; }

    [[nodiscard]] bool        has_label(const Label &label) const;
    [[nodiscard]] std::size_t axis(const Label &label) const;
    [[nodiscard]] std::size_t extent(const Label &label) const { return dims_[axis(label)]; }

    /// Element access by per-axis indices in label order.
    [[nodiscard]] cplx &at(std::initializer_list<std::size_t> idx);
    [[nodiscard]] cplx  at(std::initializer_list<std::size_t> idx) const;

    DenseTensor                &relabel(const Label &from, const Label &to);
    [[nodiscard]] DenseTensor   relabeled(const Label &from, const Label &to) const;
    [[nodiscard]] DenseTensor   relabeled(std::initializer_list<std::pair<Label, Label>> renames) const;
    [[nodiscard]] DenseTensor   permuted(std::span<const Label> order) const;
    [[nodiscard]] DenseTensor   permuted(std::initializer_list<Label> order) const;
    [[nodiscard]] DenseTensor   conj() const;
    [[nodiscard]] double        norm() const;
    DenseTensor                &operator*=(cplx factor);

    /// Fix `label` to index `value`, dropping that axis.
    [[nodiscard]] DenseTensor slice(const Label &label, std::size_t value) const;

    /// View as a matrix with `row_labels` as rows (in the given order) and the
    /// remaining labels as columns (in their current order).
    [[nodiscard]] RowMatrix to_matrix(std::span<const Label> row_labels) const;

  private:
    std::vector<Label>       labels_;
    std::vector<std::size_t> dims_;
    std::vector<cplx>        data_;

    void        check_invariants() const;
    std::size_t offset(std::initializer_list<std::size_t> idx) const;
};

/// Sum over all labels the two tensors share. Result labels are the free labels
/// of `a` followed by the free labels of `b`, each in their original order.
DenseTensor contract(const DenseTensor &a, const DenseTensor &b);

/// Multiply every slice along `label` by the matching weight.
DenseTensor scale_axis(DenseTensor t, const Label &label, std::span<const double> weights);

struct SvdResult {
    DenseTensor         u; // row labels + bond
    std::vector<double> s; // descending, >= 0
    DenseTensor         v; // bond + column labels
    double              discarded_weight = 0.0;
};

/// Truncated SVD across the bipartition `row_labels | rest`.
///
/// Singular values below 1e-14 of the largest are zeroed first. Then the
/// smallest k with discarded squared weight fraction <= cutoff is kept, capped
/// at chi_max, and never less than 1. Throws on an all-zero tensor.
SvdResult svd_truncated(const DenseTensor &t, std::span<const Label> row_labels, std::size_t chi_max, double cutoff,
                        const Label &bond = "bond");

struct QrResult {
    DenseTensor q; // row labels + bond, isometric
    DenseTensor r; // bond + column labels, real non-negative diagonal
};

QrResult qr_decompose(const DenseTensor &t, std::span<const Label> row_labels, const Label &bond = "bond");

/// Per-thread count of `contract` calls; used to audit sweep cost.
std::uint64_t contraction_count();
void          reset_contraction_count();

} // namespace wmps
