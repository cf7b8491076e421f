#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "wmps/harness.hpp"
#include "wmps/oracle_check.hpp"

namespace {

using namespace wmps;

struct CommonFlags {
    std::optional<unsigned>      threads;
    std::optional<std::uint64_t> seed;
    std::string                  out;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
    cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores); overrides WMPS_THREADS");
    cmd->add_option("--seed", f.seed, "Master seed applied to every config");
    cmd->add_option("--out", f.out, "Output directory");
}

int finish_experiment(ExperimentSpec spec, const CommonFlags &f) {
    if(!f.out.empty()) spec.output_dir = f.out;
    if(f.seed)
        for(auto &c : spec.configs) c.master_seed = *f.seed;
    spec.threads    = resolve_threads(f.threads, spec.threads);
    const auto all  = run_experiment(spec, &std::cerr);
    const auto bad  = std::count_if(all.begin(), all.end(), [](const auto &s) { return s.failed; });
    std::cout << fmt::format("{} configs written to {}; {} failed\n", all.size(), spec.output_dir.string(), bad);
    return bad == 0 ? 0 : 1;
}

std::vector<std::string> split(const std::string &s) {
    std::vector<std::string> out;
    std::string              cur;
    for(char c : s) {
        if(c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if(!cur.empty()) out.push_back(cur);
    return out;
}

std::string fmt_sem(const std::optional<double> &sem) { return sem ? fmt::format("{:.6f}", *sem) : "n/a"; }

int run_fit(const std::string &dir, const std::string &model_name) {
    std::map<std::string, std::vector<EnsembleStats>> groups;
    for(const auto &entry : std::filesystem::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if(!name.ends_with(".stats.json")) continue;
        auto s = read_stats(entry.path());
        if(s.failed) {
            std::cerr << fmt::format("skipping failed config {}\n", s.config_id);
            continue;
        }
        const auto key = fmt::format("theta={} p={:g} chi={} {}", s.config.theta_label, s.config.p, s.config.chi_max,
                                     to_string(s.config.method));
        groups[key].push_back(std::move(s));
    }
    if(groups.empty()) throw std::runtime_error(fmt::format("no stats files in '{}'", dir));
    std::vector<FitModel> models;
    if(model_name == "both") models = {FitModel::log, FitModel::linear};
    else models = {parse_fit_model(model_name)};

    for(auto &[key, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [](const auto &a, const auto &b) { return a.config.n_qubits < b.config.n_qubits; });
        std::cout << key << '\n';
        std::vector<ScalingPoint> points;
        for(const auto &m : members) {
            std::cout << fmt::format("  N={:<3} S_inf={:.6f} sem={} n={}\n", m.config.n_qubits, m.s_inf,
                                     fmt_sem(m.s_inf_sem), m.n_trajectories);
            points.push_back({static_cast<double>(m.config.n_qubits), m.s_inf, m.s_inf_sem});
        }
        if(points.size() < 2) {
            std::cout << "  (need at least two sizes to fit)\n";
            continue;
        }
        for(auto model : models) {
            const auto fit = fit_scaling(points, model);
            std::cout << fmt::format("  {:<6} slope={:.6f} +- {:.6f} intercept={:.6f} chi2={:.4g}{}\n",
                                     to_string(model), fit.slope, fit.slope_stderr, fit.intercept, fit.chi2,
                                     fit.weighted ? "" : " (unweighted)");
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Weak-measurement MPS trajectory simulator"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string spec_path;
    bool        no_records = false;
    auto       *run        = app.add_subcommand("run", "Run the configs of a JSON spec file");
    run->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    run->add_flag("--no-records", no_records, "Skip per-trajectory measurement record files");
    add_common(run, run_flags);

    CommonFlags sweep_flags;
    std::string sweep_n = "8", sweep_theta = "pi/4", sweep_p = "1", sweep_chi = "1000";
    std::size_t sweep_traj = 10, sweep_tmax = 30, sweep_tcut = 20;
    std::string sweep_order = "UMUM", sweep_method = "markov";
    double      sweep_cutoff = 1e-6;
    auto       *sweep        = app.add_subcommand("sweep", "Run a cartesian sweep given on the command line");
    sweep->add_option("--n", sweep_n, "Comma-separated system sizes");
    sweep->add_option("--theta", sweep_theta, "Comma-separated angles, e.g. pi/6,pi/3");
    sweep->add_option("--p", sweep_p, "Comma-separated measurement probabilities");
    sweep->add_option("--chi", sweep_chi, "Comma-separated bond dimension caps");
    sweep->add_option("--trajectories", sweep_traj, "Trajectories per config");
    sweep->add_option("--t-max", sweep_tmax, "Time steps");
    sweep->add_option("--t-cutoff", sweep_tcut, "First step of the long-time window");
    sweep->add_option("--cutoff", sweep_cutoff, "Discarded-weight cutoff");
    sweep->add_option("--order", sweep_order, "UMUM or UUMM");
    sweep->add_option("--method", sweep_method, "markov or born");
    sweep->add_flag("--no-records", no_records, "Skip per-trajectory measurement record files");
    add_common(sweep, sweep_flags);

    std::size_t   oracle_cases = 200, oracle_max_n = 8;
    std::uint64_t oracle_seed  = 1;
    double        prob_tol = 1e-10, fid_tol = 1e-10;
    auto         *oracle   = app.add_subcommand("oracle-check", "Cross-check the sampler against the statevector");
    oracle->add_option("--cases", oracle_cases, "Random cases");
    oracle->add_option("--seed", oracle_seed, "Seed");
    oracle->add_option("--max-n", oracle_max_n, "Largest register")->check(CLI::Range(2, 14));
    oracle->add_option("--prob-tol", prob_tol, "Joint probability tolerance");
    oracle->add_option("--fidelity-tol", fid_tol, "1 - fidelity tolerance");

    CommonFlags chi_flags;
    std::size_t chi_n = 12, chi_traj = 20, chi_tmax = 30, chi_tcut = 20;
    std::string chi_theta = "pi/3", chi_list = "64,128,256,512";
    double      chi_p     = 1.0;
    auto       *chi       = app.add_subcommand("chi-scan", "Rerun one ensemble at several bond dimensions");
    chi->add_option("--n", chi_n, "System size");
    chi->add_option("--theta", chi_theta, "Angle");
    chi->add_option("--p", chi_p, "Measurement probability");
    chi->add_option("--chi", chi_list, "Comma-separated bond dimensions");
    chi->add_option("--trajectories", chi_traj, "Trajectories");
    chi->add_option("--t-max", chi_tmax, "Time steps");
    chi->add_option("--t-cutoff", chi_tcut, "First step of the long-time window");
    add_common(chi, chi_flags);

    std::string fit_dir, fit_model = "both";
    auto       *fit = app.add_subcommand("fit", "Fit S_inf against N for every (theta, p) group in a directory");
    fit->add_option("--dir", fit_dir, "Directory of .stats.json files")->required()->check(CLI::ExistingDirectory);
    fit->add_option("--model", fit_model, "log, linear, or both")
        ->check(CLI::IsMember({"log", "linear", "both"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if(*run) {
            auto spec = load_spec(spec_path);
            if(no_records) spec.write_records = false;
            return finish_experiment(std::move(spec), run_flags);
        }
        if(*sweep) {
            nlohmann::json j;
            auto           numbers = [](const std::string &s, auto parse) {
                nlohmann::json arr = nlohmann::json::array();
                for(const auto &x : split(s)) arr.push_back(parse(x));
                return arr;
            };
            nlohmann::json thetas = nlohmann::json::array();
            for(const auto &x : split(sweep_theta)) thetas.push_back(x);
            j["sweep"] = {{"theta", thetas},
                          {"n_qubits", numbers(sweep_n, [](const std::string &x) { return std::stoul(x); })},
                          {"p", numbers(sweep_p, [](const std::string &x) { return std::stod(x); })},
                          {"chi_max", numbers(sweep_chi, [](const std::string &x) { return std::stoul(x); })}};
            j["defaults"] = {{"n_trajectories", sweep_traj}, {"t_max", sweep_tmax}, {"t_cutoff", sweep_tcut},
                             {"cutoff", sweep_cutoff},       {"order", sweep_order}, {"method", sweep_method}};
            j["write_records"] = !no_records;
            return finish_experiment(parse_spec(j), sweep_flags);
        }
        if(*oracle) {
            const auto report = run_oracle_check(oracle_cases, oracle_seed, 2, oracle_max_n);
            std::cout << fmt::format("{} cases: max |P_mps - P_dense| = {:.3e}, min fidelity = {:.15f}\n",
                                     report.cases.size(), report.max_probability_error, report.min_fidelity);
            std::cout << fmt::format("{} completeness checks: max |sum P - 1| = {:.3e}\n", report.completeness_checks,
                                     report.max_completeness_error);
            const bool ok = report.max_probability_error <= prob_tol && 1.0 - report.min_fidelity <= fid_tol &&
                            report.max_completeness_error <= 1e-9;
            std::cout << (ok ? "oracle-check passed\n" : "oracle-check FAILED\n");
            return ok ? 0 : 1;
        }
        if(*chi) {
            CircuitConfig c;
            c.n_qubits       = chi_n;
            c.theta          = parse_angle(chi_theta);
            c.theta_label    = chi_theta;
            c.p              = chi_p;
            c.n_trajectories = chi_traj;
            c.t_max          = chi_tmax;
            c.t_cutoff       = chi_tcut;
            if(chi_flags.seed) c.master_seed = *chi_flags.seed;
            std::vector<std::size_t> chis;
            for(const auto &x : split(chi_list)) chis.push_back(std::stoul(x));
            const auto points = chi_convergence_scan(c, chis, resolve_threads(chi_flags.threads, 1));
            nlohmann::json out = nlohmann::json::array();
            for(const auto &pt : points) {
                const double rel =
                    std::abs(pt.s_inf - points.back().s_inf) / std::max(std::abs(points.back().s_inf), 1e-300);
                std::cout << fmt::format("chi={:<5} S_inf={:.10f} sem={} peak_chi={} rel_to_largest={:.3e}\n", pt.chi,
                                         pt.s_inf, fmt_sem(pt.sem), pt.peak_bond, rel);
                out.push_back({{"chi", pt.chi},
                               {"s_inf", pt.s_inf},
                               {"sem", pt.sem ? nlohmann::json(*pt.sem) : nlohmann::json(nullptr)},
                               {"peak_bond", pt.peak_bond}});
            }
            if(!chi_flags.out.empty()) {
                std::filesystem::create_directories(chi_flags.out);
                std::ofstream(std::filesystem::path(chi_flags.out) / "chi_scan.json") << out.dump(2) << '\n';
            }
            return 0;
        }
        if(*fit) return run_fit(fit_dir, fit_model);
    } catch(const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
