#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "helpers.hpp"
#include "wmps/tensor.hpp"

using namespace wmps;
using wmps::testing::max_abs_diff;
using wmps::testing::random_tensor;

TEST(Tensor, RowMajorLayoutWithLastLabelFastest) {
    DenseTensor t({"a", "b", "c"}, {2, 3, 4});
    for(std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(i);
    EXPECT_EQ(t.at({1, 2, 3}), cplx(1 * 12 + 2 * 4 + 3));
    EXPECT_EQ(t.at({0, 1, 0}), cplx(4));
}

TEST(Tensor, ConstructorRejectsBadShapes) {
    EXPECT_THROW(DenseTensor({"a", "a"}, {2, 2}), std::invalid_argument);
    EXPECT_THROW(DenseTensor({"a"}, {2, 2}), std::invalid_argument);
    EXPECT_THROW(DenseTensor({"a"}, {3}, std::vector<cplx>(2)), std::invalid_argument);
}

TEST(Tensor, PermuteMovesElementsWithLabels) {
    Rng        rng(1);
    const auto t = random_tensor({"a", "b", "c"}, {2, 3, 4}, rng);
    const auto p = t.permuted({"c", "a", "b"});
    EXPECT_EQ(p.dims(), (std::vector<std::size_t>{4, 2, 3}));
    for(std::size_t a = 0; a < 2; ++a)
        for(std::size_t b = 0; b < 3; ++b)
            for(std::size_t c = 0; c < 4; ++c) EXPECT_EQ(p.at({c, a, b}), t.at({a, b, c}));
    const auto back = p.permuted({"a", "b", "c"});
    EXPECT_EQ(back.data(), t.data());
}

TEST(Tensor, ContractMatchesNaiveLoopsWithSharedLabelsInAnyOrder) {
    Rng        rng(2);
    const auto a = random_tensor({"i", "k", "j", "m"}, {2, 3, 4, 2}, rng);
    const auto b = random_tensor({"m", "l", "k"}, {2, 5, 3}, rng);
    const auto c = contract(a, b);
    ASSERT_EQ(c.labels(), (std::vector<Label>{"i", "j", "l"}));
    for(std::size_t i = 0; i < 2; ++i)
        for(std::size_t j = 0; j < 4; ++j)
            for(std::size_t l = 0; l < 5; ++l) {
                cplx acc = 0;
                for(std::size_t k = 0; k < 3; ++k)
                    for(std::size_t m = 0; m < 2; ++m) acc += a.at({i, k, j, m}) * b.at({m, l, k});
                EXPECT_NEAR(std::abs(c.at({i, j, l}) - acc), 0.0, 1e-12);
            }
}

TEST(Tensor, ContractWithoutSharedLabelsIsOuterProduct) {
    Rng        rng(3);
    const auto a = random_tensor({"x"}, {3}, rng);
    const auto b = random_tensor({"y", "z"}, {2, 2}, rng);
    const auto c = contract(a, b);
    for(std::size_t x = 0; x < 3; ++x)
        for(std::size_t y = 0; y < 2; ++y)
            for(std::size_t z = 0; z < 2; ++z) EXPECT_EQ(c.at({x, y, z}), a.at({x}) * b.at({y, z}));
}

TEST(Tensor, ContractFullyToScalar) {
    Rng        rng(4);
    const auto a = random_tensor({"x", "y"}, {3, 2}, rng);
    const auto s = contract(a, a.conj());
    ASSERT_EQ(s.rank(), 0U);
    EXPECT_NEAR(s.data()[0].real(), a.norm() * a.norm(), 1e-12);
}

TEST(Tensor, ContractRejectsMismatchedExtents) {
    const DenseTensor a({"x", "y"}, {2, 3});
    const DenseTensor b({"y"}, {4});
    EXPECT_THROW((void)contract(a, b), std::invalid_argument);
}

TEST(Tensor, ContractionIsAssociative) {
    Rng rng(5);
    for(int trial = 0; trial < 10; ++trial) {
        const auto a   = random_tensor({"i", "j"}, {3, 4}, rng);
        const auto b   = random_tensor({"j", "k", "p"}, {4, 2, 2}, rng);
        const auto c   = random_tensor({"k", "q"}, {2, 5}, rng);
        const auto lhs = contract(contract(a, b), c).permuted({"i", "p", "q"});
        const auto rhs = contract(a, contract(b, c)).permuted({"i", "p", "q"});
        EXPECT_LT(max_abs_diff(lhs.data(), rhs.data()), 1e-12);
    }
}

TEST(Tensor, ContractCounterCountsCalls) {
    reset_contraction_count();
    const DenseTensor a({"x"}, {2});
    (void)contract(a, a);
    (void)contract(a, a);
    EXPECT_EQ(contraction_count(), 2U);
}

TEST(Tensor, SliceFixesOneIndex) {
    Rng        rng(6);
    const auto t = random_tensor({"a", "b", "c"}, {2, 3, 2}, rng);
    const auto s = t.slice("b", 2);
    EXPECT_EQ(s.labels(), (std::vector<Label>{"a", "c"}));
    EXPECT_EQ(s.at({1, 0}), t.at({1, 2, 0}));
}

TEST(Tensor, RelabelRejectsCollision) {
    DenseTensor t({"a", "b"}, {2, 2});
    EXPECT_THROW(t.relabel("a", "b"), std::invalid_argument);
    EXPECT_EQ(t.relabeled("a", "z").labels(), (std::vector<Label>{"z", "b"}));
}

namespace {
DenseTensor reconstruct(const SvdResult &r, const std::string &bond) {
    return contract(scale_axis(r.u, bond, r.s), r.v);
}
} // namespace

TEST(Svd, ExactReconstructionWithoutTruncation) {
    Rng rng(7);
    for(int trial = 0; trial < 10; ++trial) {
        const auto                 t    = random_tensor({"l", "p", "q", "r"}, {3, 2, 2, 4}, rng);
        const std::array<Label, 2> rows = {"l", "p"};
        const auto                 r    = svd_truncated(t, rows, SIZE_MAX, 0.0);
        const auto rec = reconstruct(r, "bond").permuted({"l", "p", "q", "r"});
        EXPECT_LT(max_abs_diff(rec.data(), t.data()), 1e-12 * t.norm());
        EXPECT_TRUE(std::is_sorted(r.s.rbegin(), r.s.rend()));
        EXPECT_EQ(r.discarded_weight, 0.0);
    }
}

TEST(Svd, FactorsAreIsometries) {
    Rng                        rng(8);
    const auto                 t    = random_tensor({"a", "b", "c"}, {4, 2, 3}, rng);
    const std::array<Label, 1> rows = {"a"};
    const auto                 r    = svd_truncated(t, rows, SIZE_MAX, 0.0);
    const std::array<Label, 1> u_rows = {"bond"};
    const RowMatrix            u      = r.u.to_matrix(std::array<Label, 1>{"a"});
    const RowMatrix            v      = r.v.to_matrix(u_rows);
    const auto                 k      = static_cast<Eigen::Index>(r.s.size());
    EXPECT_LT((u.adjoint() * u - RowMatrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((v * v.adjoint() - RowMatrix::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Svd, CutoffBoundaryOnDiagonalSpectrum) {
    DenseTensor                t({"a", "b"}, {2, 2}, {0.8, 0.0, 0.0, 0.6});
    const std::array<Label, 1> rows = {"a"};
    // Discarding 0.6 loses weight 0.36 of 1.
    EXPECT_EQ(svd_truncated(t, rows, 10, 0.30).s.size(), 2U);
    const auto kept = svd_truncated(t, rows, 10, 0.40);
    ASSERT_EQ(kept.s.size(), 1U);
    EXPECT_NEAR(kept.s[0], 0.8, 1e-15);
    EXPECT_NEAR(kept.discarded_weight, 0.36, 1e-15);
}

TEST(Svd, ChiCapAndMinimumOfOne) {
    Rng                        rng(9);
    const auto                 t    = random_tensor({"a", "b"}, {6, 6}, rng);
    const std::array<Label, 1> rows = {"a"};
    EXPECT_EQ(svd_truncated(t, rows, 3, 0.0).s.size(), 3U);
    EXPECT_EQ(svd_truncated(t, rows, 10, 1.0).s.size(), 1U);
}

TEST(Svd, RelativeZeroSingularValuesAreDropped) {
    DenseTensor                t({"a", "b"}, {2, 2}, {1.0, 0.0, 0.0, 1e-16});
    const std::array<Label, 1> rows = {"a"};
    EXPECT_EQ(svd_truncated(t, rows, 10, 0.0).s.size(), 1U);
}

TEST(Svd, AllZeroInputThrows) {
    DenseTensor                t({"a", "b"}, {2, 2});
    const std::array<Label, 1> rows = {"a"};
    EXPECT_THROW((void)svd_truncated(t, rows, 10, 0.0), std::runtime_error);
    EXPECT_THROW((void)svd_truncated(DenseTensor({"a", "b"}, {2, 2}, {1.0, 0, 0, 1.0}), rows, 0, 0.0),
                 std::invalid_argument);
}

TEST(Svd, TruncationErrorBoundHolds) {
    Rng rng(10);
    for(int trial = 0; trial < 20; ++trial) {
        const auto                 t      = random_tensor({"a", "b"}, {8, 8}, rng);
        const double               cutoff = rng.uniform() * 0.3;
        const std::array<Label, 1> rows   = {"a"};
        const auto                 r      = svd_truncated(t, rows, SIZE_MAX, cutoff);
        const auto                 rec    = reconstruct(r, "bond");
        double                     err    = 0.0;
        for(std::size_t i = 0; i < t.size(); ++i) err += std::norm(rec.data()[i] - t.data()[i]);
        const double total = t.norm() * t.norm();
        EXPECT_LE(err / total, cutoff + 1e-12);
        EXPECT_NEAR(err / total, r.discarded_weight, 1e-12);
    }
}

TEST(Qr, IsometricQAndNonNegativeRealDiagonal) {
    Rng                        rng(11);
    const auto                 t    = random_tensor({"l", "p", "r"}, {3, 2, 5}, rng);
    const std::array<Label, 2> rows = {"l", "p"};
    const auto                 qr   = qr_decompose(t, rows);
    const RowMatrix            q    = qr.q.to_matrix(rows);
    EXPECT_LT((q.adjoint() * q - RowMatrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff(), 1e-12);
    const RowMatrix r = qr.r.to_matrix(std::array<Label, 1>{"bond"});
    for(Eigen::Index i = 0; i < std::min(r.rows(), r.cols()); ++i) {
        EXPECT_GE(r(i, i).real(), 0.0);
        EXPECT_NEAR(r(i, i).imag(), 0.0, 1e-14);
    }
    const auto rec = contract(qr.q, qr.r).permuted({"l", "p", "r"});
    EXPECT_LT(max_abs_diff(rec.data(), t.data()), 1e-12 * t.norm());
}
