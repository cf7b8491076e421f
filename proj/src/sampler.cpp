#include "wmps/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "wmps/gates.hpp"

namespace wmps {

namespace {
    constexpr double k_zero_branch  = 1e-12;
    constexpr double k_norm_mismatch = 1e-8;

    // Coupling with the ancilla prepared in |0>: K(q, a, p) = M[(q, a), (p, 0)].
    DenseTensor coupling_tensor(const Eigen::Matrix4cd &m) {
        DenseTensor k({"q", "a", "p"}, {2, 2, 2});
        for(std::size_t q = 0; q < 2; ++q)
            for(std::size_t a = 0; a < 2; ++a)
                for(std::size_t p = 0; p < 2; ++p)
                    k.at({q, a, p}) = m(static_cast<Eigen::Index>(2 * q + a), static_cast<Eigen::Index>(2 * p));
        return k;
    }

    double env_trace(const DenseTensor &env) {
        const auto n = env.dims()[0];
        double     t = 0.0;
        for(std::size_t i = 0; i < n; ++i) t += env.at({i, i}).real();
        return t;
    }

    // Divide the environment by its trace and rename it to act as the next left environment.
    DenseTensor next_left_env(DenseTensor env) {
        const double t = env_trace(env);
        env *= 1.0 / t;
        return env.relabeled({{"r", "l"}, {"rc", "lc"}}).permuted({"l", "lc"});
    }

    MeasurementRecord sweep(MpsState &state, const LayerPlan &plan, Rng *rng, std::span<const int> forced,
                            const TruncationParams &params, const SamplerOptions &opts) {
        const std::size_t n = state.size();
        if(plan.size() != n)
            throw std::invalid_argument(fmt::format("layer plan covers {} sites, state has {}", plan.size(), n));
        if(!rng && forced.size() != n)
            throw std::invalid_argument(fmt::format("{} forced outcomes for {} sites", forced.size(), n));

        state.canonicalize(0);
        if(const double norm2 = std::pow(state.site(0).norm(), 2); std::abs(norm2 - 1.0) > k_norm_mismatch)
            throw std::invalid_argument(fmt::format("input state not normalized (norm^2 = {})", norm2));
        const DenseTensor measure  = coupling_tensor(weak_measurement_gate(plan.theta));
        const DenseTensor identity = coupling_tensor(Eigen::Matrix4cd::Identity());

        MeasurementRecord                       record;
        std::vector<std::optional<DenseTensor>> coupled(n);
        record.sites.resize(n);
        DenseTensor env({"l", "lc"}, {1, 1}, {cplx{1.0, 0.0}});

        for(std::size_t i = 0; i < n; ++i) {
            const auto &a         = state.site(i);
            const bool  measured  = plan.measured[i];
            const bool  couple_in = measured || opts.identity_coupling_for_unmeasured;

            if(!couple_in) {
                auto half = contract(env, a);
                env = next_left_env(contract(half, a.conj().relabeled({{"l", "lc"}, {"r", "rc"}})));
            } else {
                auto tilde = contract(measured ? measure : identity, a).relabel("q", "p");
                auto half  = contract(env, tilde);
                auto p     = contract(half, tilde.conj().relabeled({{"l", "lc"}, {"a", "ac"}, {"r", "rc"}}));

                const Eigen::Matrix2cd rho = ancilla_rdm(p);
                int                    s   = 0;
                if(!measured) {
                    s = 0;
                } else if(rng) {
                    s = rng->uniform() < rho(0, 0).real() ? 0 : 1;
                } else {
                    s = forced[i];
                    if(s != 0 && s != 1) throw std::invalid_argument(fmt::format("forced outcome {} at site {}", s, i));
                }
                const double q = std::clamp(rho(s, s).real(), 0.0, 1.0);
                if(q < k_zero_branch)
                    throw std::runtime_error(fmt::format("measure-zero branch: outcome {} at site {} has probability {}",
                                                         s, i, q));
                env = next_left_env(p.slice("a", static_cast<std::size_t>(s)).slice("ac", static_cast<std::size_t>(s)));
                if(measured) {
                    record.sites[i] = {true, s, q};
                    coupled[i]      = std::move(tilde);
                }
            }
            if(opts.check_right_isometry)
                for(std::size_t j = i + 1; j < n; ++j)
                    if(state.right_isometry_error(j) > 1e-8)
                        throw std::logic_error(fmt::format("site {} lost right-isometry at sweep step {}", j, i));
        }

        // Project every coupled tensor onto its outcome. Dividing site i by
        // sqrt(q_i) divides the state by sqrt(joint probability) without
        // forming the (possibly tiny) product.
        for(std::size_t i = 0; i < n; ++i) {
            if(!coupled[i]) continue;
            const auto &r  = record.sites[i];
            auto        pr = coupled[i]->slice("a", static_cast<std::size_t>(r.outcome)).permuted({"l", "p", "r"});
            pr *= 1.0 / std::sqrt(r.probability);
            state.set_site(i, std::move(pr));
        }
        const double norm = state.compress(params);
        if(std::abs(norm - 1.0) > k_norm_mismatch)
            throw std::runtime_error(
                fmt::format("post-measurement norm {} disagrees with swept joint probability", norm));
        return record;
    }
} // namespace

std::size_t LayerPlan::measured_count() const {
    return static_cast<std::size_t>(std::count(measured.begin(), measured.end(), true));
}

LayerPlan draw_layer_plan(std::size_t n, double p, double theta, Rng &rng) {
    LayerPlan plan{std::vector<bool>(n, false), theta};
    for(std::size_t i = 0; i < n; ++i) plan.measured[i] = rng.bernoulli(p);
    return plan;
}

LayerPlan full_layer_plan(std::size_t n, double theta) { return {std::vector<bool>(n, true), theta}; }

double MeasurementRecord::joint_probability() const {
    double p = 1.0;
    for(const auto &s : sites)
        if(s.measured) p *= s.probability;
    return p;
}

std::vector<int> MeasurementRecord::outcomes() const {
    std::vector<int> out;
    out.reserve(sites.size());
    for(const auto &s : sites) out.push_back(s.outcome);
    return out;
}

MeasurementRecord sample_measurement_layer(MpsState &state, const LayerPlan &plan, Rng &rng,
                                           const TruncationParams &params, const SamplerOptions &opts) {
    return sweep(state, plan, &rng, {}, params, opts);
}

MeasurementRecord force_measurement_layer(MpsState &state, const LayerPlan &plan, std::span<const int> outcomes,
                                          const TruncationParams &params, const SamplerOptions &opts) {
    return sweep(state, plan, nullptr, outcomes, params, opts);
}

Eigen::Matrix2cd ancilla_rdm(const DenseTensor &p) {
    const auto ordered = p.permuted({"a", "ac", "r", "rc"});
    const auto chi     = ordered.extent("r");
    if(ordered.extent("rc") != chi) throw std::invalid_argument("ancilla_rdm: ket and bra links differ in extent");
    Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
    for(std::size_t a = 0; a < 2; ++a)
        for(std::size_t ac = 0; ac < 2; ++ac)
            for(std::size_t r = 0; r < chi; ++r)
                rho(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(ac)) += ordered.at({a, ac, r, r});
    const double trace = rho.trace().real();
    if(!(trace > k_zero_branch)) throw std::runtime_error(fmt::format("ancilla_rdm: nonpositive trace {}", trace));
    return rho / trace;
}

BornOutcome born_projective_measure(MpsState &state, std::size_t site, Rng &rng, int forced) {
    state.canonicalize(site);
    const auto &a = state.site(site);
    double      w[2]{0.0, 0.0};
    for(std::size_t l = 0; l < a.dims()[0]; ++l)
        for(std::size_t p = 0; p < 2; ++p)
            for(std::size_t r = 0; r < a.dims()[2]; ++r) w[p] += std::norm(a.at({l, p, r}));
    const double total = w[0] + w[1];
    int          s     = forced;
    if(s < 0) s = rng.uniform() < w[0] / total ? 0 : 1;
    const double prob = w[s] / total;
    if(prob < k_zero_branch)
        throw std::runtime_error(fmt::format("measure-zero branch: qubit {} = {} has probability {}", site, s, prob));

    auto projected = a;
    for(std::size_t l = 0; l < a.dims()[0]; ++l)
        for(std::size_t r = 0; r < a.dims()[2]; ++r) projected.at({l, static_cast<std::size_t>(1 - s), r}) = 0.0;
    projected *= 1.0 / std::sqrt(w[s]);
    state.set_center_site(std::move(projected));
    return {s, prob};
}

MeasurementRecord born_measure_layer(MpsState &state, const LayerPlan &plan, Rng &rng,
                                     const TruncationParams &params) {
    if(plan.size() != state.size())
        throw std::invalid_argument(fmt::format("layer plan covers {} sites, state has {}", plan.size(), state.size()));
    MeasurementRecord record;
    record.sites.resize(state.size());
    for(std::size_t i = 0; i < state.size(); ++i) {
        if(!plan.measured[i]) continue;
        const auto out  = born_projective_measure(state, i, rng);
        record.sites[i] = {true, out.outcome, out.probability};
    }
    state.compress(params);
    return record;
}

} // namespace wmps
