#include "wmps/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace wmps {

namespace {
    thread_local std::uint64_t g_contractions = 0;

    std::size_t product(std::span<const std::size_t> dims) {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
    }

    std::vector<std::size_t> row_major_strides(std::span<const std::size_t> dims) {
        std::vector<std::size_t> strides(dims.size(), 1);
        for(std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
        return strides;
    }

    // Labels of `t` not in `exclude`, in t's order.
    std::vector<Label> remaining_labels(const DenseTensor &t, std::span<const Label> exclude) {
        std::vector<Label> out;
        for(const auto &l : t.labels())
            if(std::find(exclude.begin(), exclude.end(), l) == exclude.end()) out.push_back(l);
        return out;
    }

    std::vector<std::size_t> extents_of(const DenseTensor &t, std::span<const Label> labels) {
        std::vector<std::size_t> out;
        out.reserve(labels.size());
        for(const auto &l : labels) out.push_back(t.extent(l));
        return out;
    }

    void check_row_labels(const DenseTensor &t, std::span<const Label> row_labels) {
        if(row_labels.empty() || row_labels.size() >= t.rank())
            throw std::invalid_argument(
                fmt::format("row labels {} must be a nonempty proper subset of {}", row_labels, t.labels()));
        for(const auto &l : row_labels)
            if(!t.has_label(l)) throw std::invalid_argument(fmt::format("row label '{}' not in {}", l, t.labels()));
    }
} // namespace

DenseTensor::DenseTensor(std::vector<Label> labels, std::vector<std::size_t> dims)
    : labels_(std::move(labels)), dims_(std::move(dims)), data_(product(dims_), cplx{0.0, 0.0}) {
    check_invariants();
}

DenseTensor::DenseTensor(std::vector<Label> labels, std::vector<std::size_t> dims, std::vector<cplx> data)
    : labels_(std::move(labels)), dims_(std::move(dims)), data_(std::move(data)) {
    check_invariants();
}

DenseTensor DenseTensor::scalar(cplx value) { return DenseTensor({}, {}, {value}); }

DenseTensor DenseTensor::from_matrix(const RowMatrix &m, std::vector<Label> labels, std::vector<std::size_t> dims) {
    std::vector<cplx> data(m.data(), m.data() + m.size());
    DenseTensor       t(std::move(labels), std::move(dims), std::move(data));
    return t;
}

void DenseTensor::check_invariants() const {
    if(labels_.size() != dims_.size())
        throw std::invalid_argument(fmt::format("{} labels for {} dims", labels_.size(), dims_.size()));
    if(product(dims_) != data_.size())
        throw std::invalid_argument(fmt::format("dims {} do not match data length {}", dims_, data_.size()));
    for(std::size_t i = 0; i < labels_.size(); ++i)
        for(std::size_t j = i + 1; j < labels_.size(); ++j)
            if(labels_[i] == labels_[j]) throw std::invalid_argument(fmt::format("duplicate label '{}'", labels_[i]));
}

bool DenseTensor::has_label(const Label &label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

std::size_t DenseTensor::axis(const Label &label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if(it == labels_.end()) throw std::invalid_argument(fmt::format("no label '{}' in {}", label, labels_));
    return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> idx) const {
    if(idx.size() != rank()) throw std::invalid_argument("index rank mismatch");
    std::size_t off = 0, k = 0;
    for(auto i : idx) {
        if(i >= dims_[k]) throw std::out_of_range(fmt::format("index {} out of extent {}", i, dims_[k]));
        off = off * dims_[k++] + i;
    }
    return off;
}

cplx &DenseTensor::at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
cplx  DenseTensor::at(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

DenseTensor &DenseTensor::relabel(const Label &from, const Label &to) {
    if(from == to) return *this;
    auto k = axis(from);
    if(has_label(to)) throw std::invalid_argument(fmt::format("relabel to existing label '{}'", to));
    labels_[k] = to;
    return *this;
}

DenseTensor DenseTensor::relabeled(const Label &from, const Label &to) const {
    DenseTensor out = *this;
    out.relabel(from, to);
    return out;
}

DenseTensor DenseTensor::relabeled(std::initializer_list<std::pair<Label, Label>> renames) const {
    DenseTensor out = *this;
    // Two-phase so that swaps like {a->b, b->a} work.
    std::vector<std::size_t> axes;
    for(const auto &[from, to] : renames) axes.push_back(axis(from));
    std::size_t k = 0;
    for(const auto &r : renames) out.labels_[axes[k++]] = r.second;
    out.check_invariants();
    return out;
}

DenseTensor DenseTensor::permuted(std::initializer_list<Label> order) const {
    return permuted(std::span<const Label>(order.begin(), order.size()));
}

DenseTensor DenseTensor::permuted(std::span<const Label> order) const {
    if(order.size() != rank())
        throw std::invalid_argument(fmt::format("permutation {} does not cover {}", order, labels_));
    std::vector<std::size_t> perm;
    perm.reserve(order.size());
    for(const auto &l : order) perm.push_back(axis(l));

    bool identity = true;
    for(std::size_t k = 0; k < perm.size(); ++k) identity = identity && perm[k] == k;
    if(identity) return *this;

    const auto               src_strides = row_major_strides(dims_);
    std::vector<std::size_t> new_dims(rank()), strides(rank());
    for(std::size_t k = 0; k < rank(); ++k) {
        new_dims[k] = dims_[perm[k]];
        strides[k]  = src_strides[perm[k]];
    }
    std::vector<cplx> out(data_.size());
    if(!out.empty()) {
        // Odometer over the destination; innermost axis handled as a strided run.
        const std::size_t        last   = rank() - 1;
        const std::size_t        inner  = new_dims[last];
        const std::size_t        stride = strides[last];
        std::vector<std::size_t> idx(rank(), 0);
        std::size_t              src = 0;
        for(std::size_t dst = 0; dst < out.size(); dst += inner) {
            for(std::size_t i = 0; i < inner; ++i) out[dst + i] = data_[src + i * stride];
            for(std::size_t k = last; k-- > 0;) {
                if(++idx[k] < new_dims[k]) {
                    src += strides[k];
                    break;
                }
                src -= strides[k] * (new_dims[k] - 1);
                idx[k] = 0;
            }
        }
    }
    std::vector<Label> new_labels(order.begin(), order.end());
    return DenseTensor(std::move(new_labels), std::move(new_dims), std::move(out));
}

DenseTensor DenseTensor::conj() const {
    DenseTensor out = *this;
    for(auto &x : out.data_) x = std::conj(x);
    return out;
}

double DenseTensor::norm() const {
    double acc = 0.0;
    for(const auto &x : data_) acc += std::norm(x);
    return std::sqrt(acc);
}

DenseTensor &DenseTensor::operator*=(cplx factor) {
    for(auto &x : data_) x *= factor;
    return *this;
}

DenseTensor DenseTensor::slice(const Label &label, std::size_t value) const {
    const auto k = axis(label);
    if(value >= dims_[k]) throw std::out_of_range(fmt::format("slice {}={} out of extent {}", label, value, dims_[k]));
    std::size_t outer = 1, inner = 1;
    for(std::size_t j = 0; j < k; ++j) outer *= dims_[j];
    for(std::size_t j = k + 1; j < rank(); ++j) inner *= dims_[j];
    std::vector<cplx> out(outer * inner);
    for(std::size_t o = 0; o < outer; ++o)
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((o * dims_[k] + value) * inner), inner,
                    out.begin() + static_cast<std::ptrdiff_t>(o * inner));
    auto labels = labels_;
    auto dims   = dims_;
    labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(k));
    dims.erase(dims.begin() + static_cast<std::ptrdiff_t>(k));
    return DenseTensor(std::move(labels), std::move(dims), std::move(out));
}

RowMatrix DenseTensor::to_matrix(std::span<const Label> row_labels) const {
    auto order = std::vector<Label>(row_labels.begin(), row_labels.end());
    auto cols  = remaining_labels(*this, row_labels);
    order.insert(order.end(), cols.begin(), cols.end());
    const auto        p    = permuted(order);
    const std::size_t rows = product(extents_of(*this, row_labels));
    const std::size_t ncol = rows == 0 ? 0 : p.size() / rows;
    return Eigen::Map<const RowMatrix>(p.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(ncol));
}

DenseTensor contract(const DenseTensor &a, const DenseTensor &b) {
    ++g_contractions;
    std::vector<Label> shared;
    for(const auto &l : a.labels()) {
        if(!b.has_label(l)) continue;
        if(a.extent(l) != b.extent(l))
            throw std::invalid_argument(
                fmt::format("extent mismatch on '{}': {} vs {}", l, a.extent(l), b.extent(l)));
        shared.push_back(l);
    }
    const auto free_a = remaining_labels(a, shared);
    const auto free_b = remaining_labels(b, shared);

    std::vector<Label> order_a = free_a;
    order_a.insert(order_a.end(), shared.begin(), shared.end());
    std::vector<Label> order_b = shared;
    order_b.insert(order_b.end(), free_b.begin(), free_b.end());

    const auto        pa    = a.permuted(order_a);
    const auto        pb    = b.permuted(order_b);
    const std::size_t rows  = product(extents_of(a, free_a));
    const std::size_t inner = product(extents_of(a, shared));
    const std::size_t cols  = product(extents_of(b, free_b));

    using Map = Eigen::Map<const RowMatrix>;
    Map ma(pa.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(inner));
    Map mb(pb.data().data(), static_cast<Eigen::Index>(inner), static_cast<Eigen::Index>(cols));

    std::vector<Label> labels = free_a;
    labels.insert(labels.end(), free_b.begin(), free_b.end());
    auto dims = extents_of(a, free_a);
    auto db   = extents_of(b, free_b);
    dims.insert(dims.end(), db.begin(), db.end());

    DenseTensor                 out(std::move(labels), std::move(dims));
    Eigen::Map<RowMatrix>       mc(out.data().data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if(rows > 0 && cols > 0) mc.noalias() = ma * mb;
    return out;
}

DenseTensor scale_axis(DenseTensor t, const Label &label, std::span<const double> weights) {
    const auto k = t.axis(label);
    if(weights.size() != t.dims()[k])
        throw std::invalid_argument(fmt::format("{} weights for extent {}", weights.size(), t.dims()[k]));
    std::size_t inner = 1;
    for(std::size_t j = k + 1; j < t.rank(); ++j) inner *= t.dims()[j];
    auto &data = t.data();
    for(std::size_t i = 0; i < data.size(); ++i) data[i] *= weights[(i / inner) % weights.size()];
    return t;
}

SvdResult svd_truncated(const DenseTensor &t, std::span<const Label> row_labels, std::size_t chi_max, double cutoff,
                        const Label &bond) {
    check_row_labels(t, row_labels);
    if(chi_max == 0) throw std::invalid_argument("chi_max must be positive");
    if(cutoff < 0.0) throw std::invalid_argument("cutoff must be non-negative");
    const auto col_labels = remaining_labels(t, row_labels);
    const auto m          = t.to_matrix(row_labels);

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd          &sv = svd.singularValues();
    if(sv.size() == 0 || !(sv(0) > 0.0)) throw std::runtime_error("svd of an all-zero tensor");

    const double        floor = tol::relative_zero_singular * sv(0);
    std::vector<double> s(static_cast<std::size_t>(sv.size()));
    for(std::size_t i = 0; i < s.size(); ++i) {
        const double x = sv(static_cast<Eigen::Index>(i));
        s[i]           = x < floor ? 0.0 : x;
    }
    double total = 0.0;
    for(double x : s) total += x * x;

    // Smallest k whose tail weight fits under the cutoff.
    std::size_t k    = s.size();
    double      tail = 0.0;
    while(k > 1) {
        const double next = tail + s[k - 1] * s[k - 1];
        if(next / total > cutoff) break;
        tail = next;
        --k;
    }
    k = std::max<std::size_t>(1, std::min(k, chi_max));
    double discarded = 0.0;
    for(std::size_t i = k; i < s.size(); ++i) discarded += s[i] * s[i];

    const auto rk   = static_cast<Eigen::Index>(k);
    RowMatrix  u    = svd.matrixU().leftCols(rk);
    RowMatrix  vh   = svd.matrixV().leftCols(rk).adjoint();
    auto       rdim = extents_of(t, row_labels);
    auto       cdim = extents_of(t, col_labels);

    std::vector<Label> ul(row_labels.begin(), row_labels.end());
    ul.push_back(bond);
    rdim.push_back(k);
    std::vector<Label> vl{bond};
    vl.insert(vl.end(), col_labels.begin(), col_labels.end());
    cdim.insert(cdim.begin(), k);

    SvdResult out;
    out.u = DenseTensor::from_matrix(u, std::move(ul), std::move(rdim));
    out.v = DenseTensor::from_matrix(vh, std::move(vl), std::move(cdim));
    out.s.assign(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
    out.discarded_weight = discarded / total;
    return out;
}

QrResult qr_decompose(const DenseTensor &t, std::span<const Label> row_labels, const Label &bond) {
    check_row_labels(t, row_labels);
    const auto col_labels = remaining_labels(t, row_labels);
    const auto m          = t.to_matrix(row_labels);
    const auto rows = m.rows(), cols = m.cols();
    const auto k = std::min(rows, cols);

    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    Eigen::MatrixXcd                       q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
    Eigen::MatrixXcd                       r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();

    // Make diag(r) real and non-negative.
    for(Eigen::Index i = 0; i < k; ++i) {
        const cplx   d   = r(i, i);
        const double mag = std::abs(d);
        const cplx   ph  = mag > 0.0 ? d / mag : cplx{1.0, 0.0};
        r.row(i) *= std::conj(ph);
        q.col(i) *= ph;
    }

    auto               rdim = extents_of(t, row_labels);
    auto               cdim = extents_of(t, col_labels);
    std::vector<Label> ql(row_labels.begin(), row_labels.end());
    ql.push_back(bond);
    rdim.push_back(static_cast<std::size_t>(k));
    std::vector<Label> rl{bond};
    rl.insert(rl.end(), col_labels.begin(), col_labels.end());
    cdim.insert(cdim.begin(), static_cast<std::size_t>(k));

    return {DenseTensor::from_matrix(RowMatrix(q), std::move(ql), std::move(rdim)),
            DenseTensor::from_matrix(RowMatrix(r), std::move(rl), std::move(cdim))};
}

std::uint64_t contraction_count() { return g_contractions; }
void          reset_contraction_count() { g_contractions = 0; }

} // namespace wmps
