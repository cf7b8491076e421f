#include "wmps/mps.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wmps/gates.hpp"

namespace wmps {

namespace {
    const std::vector<Label> k_left_rows{"l", "p"};
    const std::vector<Label> k_right_rows{"p", "r"};
    const std::vector<Label> k_link_l{"l"};

    DenseTensor product_site(const Eigen::Vector2cd &v) { return DenseTensor({"l", "p", "r"}, {1, 2, 1}, {v(0), v(1)}); }
} // namespace

MpsState::MpsState(std::vector<DenseTensor> sites, std::optional<std::size_t> ortho_center)
    : sites_(std::move(sites)), center_(ortho_center) {
    if(sites_.empty()) throw std::invalid_argument("MpsState needs at least one site");
    for(std::size_t i = 0; i < sites_.size(); ++i) check_site(i);
    if(center_ && *center_ >= sites_.size()) throw std::out_of_range("ortho center outside chain");
}

void MpsState::check_site(std::size_t i) const {
    const auto &t = sites_[i];
    if(t.labels() != std::vector<Label>{"l", "p", "r"})
        throw std::invalid_argument(fmt::format("site {} must carry labels (l, p, r)", i));
    if(t.dims()[1] != 2) throw std::invalid_argument(fmt::format("site {} physical extent {} != 2", i, t.dims()[1]));
    if(i == 0 && t.dims()[0] != 1) throw std::invalid_argument("left boundary link must have extent 1");
    if(i + 1 == sites_.size() && t.dims()[2] != 1) throw std::invalid_argument("right boundary link must have extent 1");
    if(i > 0 && sites_[i - 1].dims()[2] != t.dims()[0])
        throw std::invalid_argument(fmt::format("link mismatch between sites {} and {}", i - 1, i));
}

MpsState MpsState::neel(std::size_t n) {
    if(n < 2 || n % 2 != 0) throw std::invalid_argument(fmt::format("Neel state needs even n >= 2, got {}", n));
    std::vector<DenseTensor> sites;
    sites.reserve(n);
    for(std::size_t i = 0; i < n; ++i)
        sites.push_back(product_site(i % 2 == 0 ? Eigen::Vector2cd(1.0, 0.0) : Eigen::Vector2cd(0.0, 1.0)));
    return MpsState(std::move(sites), 0);
}

MpsState MpsState::product(std::span<const Eigen::Vector2cd> qubits) {
    std::vector<DenseTensor> sites;
    sites.reserve(qubits.size());
    for(const auto &q : qubits) sites.push_back(product_site(q));
    return MpsState(std::move(sites), 0);
}

MpsState MpsState::from_dense(std::span<const cplx> amplitudes, std::size_t n) {
    if(n == 0 || amplitudes.size() != (std::size_t{1} << n))
        throw std::invalid_argument(fmt::format("{} amplitudes for {} qubits", amplitudes.size(), n));
    std::vector<DenseTensor> sites;
    std::size_t              rest = amplitudes.size() / 2;
    DenseTensor              cur({"l", "p", "x"}, {1, 2, rest}, {amplitudes.begin(), amplitudes.end()});
    for(std::size_t k = 0; k + 1 < n; ++k) {
        auto svd = svd_truncated(cur, k_left_rows, no_truncation.chi_max, 0.0, "b");
        sites.push_back(svd.u.relabeled("b", "r"));
        auto        rem  = scale_axis(std::move(svd.v), "b", svd.s);
        const auto  bond = svd.s.size();
        rest /= 2;
        cur = DenseTensor({"l", "p", "x"}, {bond, 2, rest}, std::move(rem.data()));
    }
    sites.push_back(cur.relabeled("x", "r"));
    MpsState state(std::move(sites), n - 1);
    state.canonicalize(0);
    return state;
}

void MpsState::set_site(std::size_t i, DenseTensor t) {
    sites_.at(i) = std::move(t);
    check_site(i);
    if(i + 1 < sites_.size()) check_site(i + 1);
    center_.reset();
}

void MpsState::set_center_site(DenseTensor t) {
    if(!center_) throw std::logic_error("set_center_site without an orthogonality center");
    const auto c = *center_;
    set_site(c, std::move(t));
    center_ = c;
}

void MpsState::move_center_right(std::size_t k) {
    auto [q, r] = qr_decompose(sites_[k], k_left_rows, "b");
    sites_[k]   = std::move(q.relabel("b", "r"));
    sites_[k + 1] = contract(r.relabeled("r", "x"), sites_[k + 1].relabeled("l", "x")).relabel("b", "l");
}

void MpsState::move_center_left(std::size_t k) {
    auto [q, r]   = qr_decompose(sites_[k], k_right_rows, "b");
    sites_[k]     = q.relabeled("b", "l").permuted({"l", "p", "r"});
    sites_[k - 1] = contract(sites_[k - 1].relabeled("r", "x"), r.relabeled({{"l", "x"}, {"b", "r"}}));
}

void MpsState::canonicalize(std::size_t center) {
    if(center >= size()) throw std::out_of_range(fmt::format("center {} outside chain of {}", center, size()));
    if(!center_) {
        for(std::size_t k = 0; k < center; ++k) move_center_right(k);
        for(std::size_t k = size() - 1; k > center; --k) move_center_left(k);
    } else {
        for(std::size_t k = *center_; k < center; ++k) move_center_right(k);
        for(std::size_t k = *center_; k > center; --k) move_center_left(k);
    }
    center_ = center;
}

void MpsState::apply_single_site_gate(const Eigen::Matrix2cd &gate, std::size_t site) {
    RowMatrix   g = gate;
    DenseTensor gt = DenseTensor::from_matrix(g, {"q", "p"}, {2, 2});
    sites_.at(site) = contract(gt, sites_[site]).relabel("q", "p").permuted({"l", "p", "r"});
}

double MpsState::apply_two_site_gate(const Eigen::Matrix4cd &gate, std::size_t left, const TruncationParams &params) {
    if(left + 1 >= size())
        throw std::invalid_argument(fmt::format("two-site gate at ({}, {}) outside chain of {}", left, left + 1, size()));
    if(!center_ || (*center_ != left && *center_ != left + 1)) canonicalize(left);

    const auto theta = contract(sites_[left].relabeled({{"p", "p1"}, {"r", "m"}}),
                                sites_[left + 1].relabeled({{"l", "m"}, {"p", "p2"}}));
    const auto phi = contract(gate_tensor(gate, "q1", "q2", "p1", "p2"), theta);

    static const std::vector<Label> rows{"l", "q1"};
    auto                            svd = svd_truncated(phi, rows, params.chi_max, params.cutoff, "b");
    double                          w   = 0.0;
    for(double x : svd.s) w += x * x;
    const double inv = 1.0 / std::sqrt(w);
    for(double &x : svd.s) x *= inv;

    sites_[left]     = svd.u.relabeled({{"q1", "p"}, {"b", "r"}});
    sites_[left + 1] = scale_axis(std::move(svd.v), "b", svd.s).relabeled({{"b", "l"}, {"q2", "p"}});
    center_          = left + 1;
    truncation_error_ += svd.discarded_weight;
    return svd.discarded_weight;
}

std::size_t MpsState::apply_gate_with_swaps(const Eigen::Matrix4cd &gate, std::size_t site_a, std::size_t site_b,
                                            const TruncationParams &params) {
    if(site_a == site_b) throw std::invalid_argument("two-site gate on a single site");
    if(site_a >= size() || site_b >= size())
        throw std::out_of_range(fmt::format("gate sites ({}, {}) outside chain of {}", site_a, site_b, size()));
    const auto             lo = std::min(site_a, site_b), hi = std::max(site_a, site_b);
    const Eigen::Matrix4cd sw      = swap_gate();
    const Eigen::Matrix4cd ordered = site_a < site_b ? gate : Eigen::Matrix4cd(sw * gate * sw);

    std::size_t swaps = 0;
    for(std::size_t k = lo; k + 1 < hi; ++k, ++swaps) apply_two_site_gate(sw, k, params);
    apply_two_site_gate(ordered, hi - 1, params);
    for(std::size_t k = hi - 1; k-- > lo; ++swaps) apply_two_site_gate(sw, k, params);
    return swaps;
}

std::vector<double> MpsState::schmidt_values(std::size_t cut) {
    if(cut == 0 || cut >= size()) throw std::out_of_range(fmt::format("cut {} outside 1..{}", cut, size() - 1));
    canonicalize(cut - 1);
    const auto                      m = sites_[cut - 1].to_matrix(k_left_rows);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    const auto                     &sv = svd.singularValues();
    return {sv.data(), sv.data() + sv.size()};
}

double MpsState::bond_entropy(std::size_t cut) {
    const auto s     = schmidt_values(cut);
    double     total = 0.0;
    for(double x : s) total += x * x;
    double entropy = 0.0;
    for(double x : s) {
        const double lambda = x * x / total;
        if(lambda >= 1e-14) entropy -= lambda * std::log(lambda);
    }
    return entropy;
}

double MpsState::global_norm() const {
    DenseTensor env({"r", "rc"}, {1, 1}, {cplx{1.0, 0.0}});
    for(const auto &a : sites_) {
        auto half = contract(env.relabeled({{"r", "l"}, {"rc", "lc"}}), a);
        env       = contract(half, a.conj().relabeled({{"l", "lc"}, {"r", "rc"}}));
    }
    return std::sqrt(std::max(0.0, env.data()[0].real()));
}

std::vector<cplx> MpsState::to_dense() const {
    DenseTensor psi = sites_[0].slice("l", 0).relabeled("p", "x");
    for(std::size_t k = 1; k < size(); ++k) {
        auto next          = contract(psi.relabeled("r", "m"), sites_[k].relabeled("l", "m"));
        const auto rows    = psi.dims()[0] * 2;
        const auto bond    = next.dims()[2];
        psi                = DenseTensor({"x", "r"}, {rows, bond}, std::move(next.data()));
    }
    return std::move(psi.data());
}

std::size_t MpsState::bond_dim(std::size_t cut) const {
    if(cut == 0 || cut >= size()) throw std::out_of_range(fmt::format("cut {} outside 1..{}", cut, size() - 1));
    return sites_[cut - 1].dims()[2];
}

std::size_t MpsState::max_bond_dim() const {
    std::size_t chi = 1;
    for(const auto &t : sites_) chi = std::max(chi, t.dims()[2]);
    return chi;
}

double MpsState::left_isometry_error(std::size_t i) const {
    const auto m = sites_.at(i).to_matrix(k_left_rows);
    const auto k = m.cols();
    return (m.adjoint() * m - RowMatrix::Identity(k, k)).cwiseAbs().maxCoeff();
}

double MpsState::right_isometry_error(std::size_t i) const {
    const auto m = sites_.at(i).to_matrix(k_link_l);
    const auto k = m.rows();
    return (m * m.adjoint() - RowMatrix::Identity(k, k)).cwiseAbs().maxCoeff();
}

bool MpsState::is_canonical(double tol) const {
    if(!center_) return false;
    for(std::size_t i = 0; i < *center_; ++i)
        if(left_isometry_error(i) > tol) return false;
    for(std::size_t i = *center_ + 1; i < size(); ++i)
        if(right_isometry_error(i) > tol) return false;
    return true;
}

void MpsState::scale_site(std::size_t i, cplx factor) {
    sites_.at(i) *= factor;
    if(center_ != i && std::abs(std::abs(factor) - 1.0) > 0.0) center_.reset();
}

double MpsState::compress(const TruncationParams &params) {
    const std::size_t n = size();
    for(std::size_t k = 0; k + 1 < n; ++k) move_center_right(k);
    const double norm = sites_[n - 1].norm();
    for(std::size_t k = n - 1; k > 0; --k) {
        auto svd = svd_truncated(sites_[k], k_link_l, params.chi_max, params.cutoff, "b");
        truncation_error_ += svd.discarded_weight;
        sites_[k] = svd.v.relabeled("b", "l");
        auto us   = scale_axis(std::move(svd.u), "b", svd.s);
        sites_[k - 1] = contract(sites_[k - 1].relabeled("r", "x"), us.relabeled({{"l", "x"}, {"b", "r"}}));
    }
    center_ = 0;
    const double after = sites_[0].norm();
    if(!(after > 0.0)) throw std::runtime_error("compress: state has zero norm");
    sites_[0] *= 1.0 / after;
    return norm;
}

double fidelity(std::span<const cplx> a, std::span<const cplx> b) {
    if(a.size() != b.size()) throw std::invalid_argument("fidelity: length mismatch");
    cplx   overlap{0.0, 0.0};
    double na = 0.0, nb = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i) {
        overlap += std::conj(a[i]) * b[i];
        na += std::norm(a[i]);
        nb += std::norm(b[i]);
    }
    return std::norm(overlap) / (na * nb);
}

void write_snapshot(std::ostream &os, const MpsState &state) {
    nlohmann::json j;
    j["n"]            = state.size();
    j["ortho_center"] = state.ortho_center() ? nlohmann::json(*state.ortho_center()) : nlohmann::json(nullptr);
    j["layout"]       = "row-major over labels";
    auto &sites       = j["sites"];
    for(std::size_t i = 0; i < state.size(); ++i) {
        const auto         &t = state.site(i);
        std::vector<double> re, im;
        for(const auto &x : t.data()) {
            re.push_back(x.real());
            im.push_back(x.imag());
        }
        sites.push_back({{"labels", t.labels()}, {"dims", t.dims()}, {"re", re}, {"im", im}});
    }
    os << j.dump() << '\n';
}

MpsState read_snapshot(std::istream &is) {
    const auto               j = nlohmann::json::parse(is);
    std::vector<DenseTensor> sites;
    for(const auto &s : j.at("sites")) {
        const auto        re = s.at("re").get<std::vector<double>>();
        const auto        im = s.at("im").get<std::vector<double>>();
        std::vector<cplx> data(re.size());
        for(std::size_t k = 0; k < re.size(); ++k) data[k] = {re[k], im.at(k)};
        sites.emplace_back(s.at("labels").get<std::vector<Label>>(), s.at("dims").get<std::vector<std::size_t>>(),
                           std::move(data));
    }
    std::optional<std::size_t> center;
    if(!j.at("ortho_center").is_null()) center = j.at("ortho_center").get<std::size_t>();
    return MpsState(std::move(sites), center);
}

} // namespace wmps
