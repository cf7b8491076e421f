#include "wmps/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace wmps {

using nlohmann::json;

bool operator==(const TimeStats &a, const TimeStats &b) {
    return a.mean == b.mean && a.std == b.std && a.sem == b.sem;
}

bool operator==(const CircuitConfig &a, const CircuitConfig &b) {
    return a.n_qubits == b.n_qubits && a.p == b.p && a.theta == b.theta && a.theta_label == b.theta_label &&
           a.chi_max == b.chi_max && a.cutoff == b.cutoff && a.t_max == b.t_max && a.t_cutoff == b.t_cutoff &&
           a.master_seed == b.master_seed && a.n_trajectories == b.n_trajectories && a.seed_group == b.seed_group &&
           a.order == b.order && a.method == b.method && a.periodic == b.periodic;
}

bool EnsembleStats::operator==(const EnsembleStats &o) const {
    return config_id == o.config_id && config == o.config && per_t == o.per_t && s_inf == o.s_inf &&
           s_inf_std == o.s_inf_std && s_inf_sem == o.s_inf_sem && n_trajectories == o.n_trajectories &&
           n_failed == o.n_failed && failed == o.failed && failures == o.failures && peak_bond == o.peak_bond &&
           wall_seconds == o.wall_seconds;
}

namespace {
    std::string sanitize(const std::string &s) {
        std::string out;
        for(char c : s) {
            if(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') out += c;
            else if(c == '/' || c == '*' || c == ' ') out += '_';
        }
        return out;
    }

    std::string theta_text(const CircuitConfig &c) {
        return c.theta_label.empty() ? fmt::format("{:.6g}", c.theta) : c.theta_label;
    }

    struct MeanStd {
        double                mean = 0.0;
        double                std  = 0.0;
        std::optional<double> sem;
    };

    MeanStd mean_std(std::span<const double> xs) {
        MeanStd r;
        if(xs.empty()) return r;
        double acc = 0.0;
        for(double x : xs) acc += x;
        r.mean = acc / static_cast<double>(xs.size());
        if(xs.size() > 1) {
            double ss = 0.0;
            for(double x : xs) ss += (x - r.mean) * (x - r.mean);
            r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
            r.sem = r.std / std::sqrt(static_cast<double>(xs.size()));
        }
        return r;
    }

    json optional_json(const std::optional<double> &v) { return v ? json(*v) : json(nullptr); }
    std::optional<double> optional_from(const json &j) {
        if(j.is_null()) return std::nullopt;
        return j.get<double>();
    }

    void reject_unknown(const json &j, const std::set<std::string> &allowed, const std::string &where) {
        if(!j.is_object()) throw std::invalid_argument(fmt::format("{} must be a JSON object", where));
        for(const auto &[key, value] : j.items())
            if(!allowed.contains(key)) throw std::invalid_argument(fmt::format("unknown key '{}' in {}", key, where));
    }

    const std::set<std::string> k_config_keys{"n_qubits",  "p",           "theta",          "theta_label",
                                              "chi_max",   "cutoff",      "t_max",          "t_cutoff",
                                              "master_seed", "n_trajectories", "seed_group", "order",
                                              "method",    "periodic"};
    const std::vector<std::string> k_sweep_order{"theta",    "n_qubits",       "p",           "chi_max",
                                                 "cutoff",   "t_max",          "t_cutoff",    "master_seed",
                                                 "n_trajectories", "seed_group", "order",       "method",
                                                 "periodic", "theta_label"};
} // namespace

std::string config_id(const CircuitConfig &config, std::size_t index) {
    std::string id = fmt::format("c{:03}_N{}_theta-{}_p{:g}_chi{}", index, config.n_qubits,
                                 sanitize(theta_text(config)), config.p, config.chi_max);
    if(config.method == MeasurementMethod::born) id += "_born";
    if(config.order == LayerOrder::UUMM) id += "_UUMM";
    return id;
}

EnsembleStats compute_stats(const CircuitConfig &config, std::span<const TrajectoryResult> results) {
    EnsembleStats s;
    s.config         = config;
    s.n_trajectories = results.size();
    if(results.empty()) return s;
    std::vector<double> column(results.size());
    s.per_t.resize(config.t_max);
    for(std::size_t t = 0; t < config.t_max; ++t) {
        for(std::size_t k = 0; k < results.size(); ++k) column[k] = results[k].s_mean.at(t);
        const auto ms = mean_std(column);
        s.per_t[t]    = {ms.mean, ms.std, ms.sem};
    }
    for(std::size_t k = 0; k < results.size(); ++k) column[k] = long_time_entropy(results[k], config.t_cutoff);
    const auto ms = mean_std(column);
    s.s_inf       = ms.mean;
    s.s_inf_std   = ms.std;
    s.s_inf_sem   = ms.sem;
    for(const auto &r : results) s.peak_bond = std::max(s.peak_bond, r.peak_bond);
    return s;
}

unsigned resolve_threads(std::optional<unsigned> flag, unsigned spec_threads) {
    const unsigned hw  = std::max(1U, std::thread::hardware_concurrency());
    auto           fix = [&](unsigned n) { return n == 0 ? hw : n; };
    if(flag) return fix(*flag);
    unsigned n = fix(spec_threads);
    if(const char *env = std::getenv("WMPS_THREADS")) {
        try {
            const unsigned cap = fix(static_cast<unsigned>(std::stoul(env)));
            n                  = std::min(n, cap);
        } catch(const std::exception &) {
            throw std::invalid_argument(fmt::format("WMPS_THREADS='{}' is not a thread count", env));
        }
    }
    return n;
}

std::vector<EnsembleRun> run_ensembles(std::span<const CircuitConfig> configs, unsigned threads) {
    for(const auto &c : configs) c.validate();
    struct Task {
        std::size_t config;
        std::size_t trajectory;
    };
    std::vector<Task> tasks;
    for(std::size_t c = 0; c < configs.size(); ++c)
        for(std::size_t k = 0; k < configs[c].n_trajectories; ++k) tasks.push_back({c, k});

    std::vector<std::optional<TrajectoryResult>> slots(tasks.size());
    std::vector<std::string>                     errors(tasks.size());
    std::vector<double>                          seconds(configs.size(), 0.0);
    std::mutex                                   seconds_mutex;
    std::atomic<std::size_t>                     next{0};

    auto worker = [&] {
        for(std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto start = std::chrono::steady_clock::now();
            try {
                slots[i] = run_trajectory(configs[tasks[i].config], tasks[i].trajectory);
            } catch(const std::exception &e) {
                errors[i] = e.what();
            }
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            std::lock_guard                     lock(seconds_mutex);
            seconds[tasks[i].config] += dt.count();
        }
    };
    const unsigned           n_threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(tasks.size())));
    std::vector<std::thread> pool;
    for(unsigned k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
    for(auto &th : pool) th.join();

    std::vector<EnsembleRun> runs(configs.size());
    for(std::size_t i = 0; i < tasks.size(); ++i) {
        auto &run = runs[tasks[i].config];
        if(slots[i]) run.results.push_back(std::move(*slots[i]));
        else run.failures.push_back(errors[i]);
    }
    for(std::size_t c = 0; c < configs.size(); ++c) runs[c].wall_seconds = seconds[c];
    return runs;
}

EnsembleStats stats_from_run(const CircuitConfig &config, const std::string &id, const EnsembleRun &run) {
    auto s         = compute_stats(config, run.results);
    s.config_id    = id;
    s.n_failed     = run.failures.size();
    s.failures     = run.failures;
    s.wall_seconds = run.wall_seconds;
    const auto total = static_cast<double>(run.results.size() + run.failures.size());
    s.failed         = run.results.empty() || static_cast<double>(run.failures.size()) > 0.01 * total;
    return s;
}

std::vector<EnsembleStats> run_experiment(const ExperimentSpec &spec, std::ostream *log) {
    std::filesystem::create_directories(spec.output_dir);
    const auto                 runs = run_ensembles(spec.configs, spec.threads);
    std::vector<EnsembleStats> all;
    json                       manifest = json::array();
    for(std::size_t c = 0; c < spec.configs.size(); ++c) {
        const auto &config = spec.configs[c];
        const auto  id     = config_id(config, c);
        auto        stats  = stats_from_run(config, id, runs[c]);
        for(const auto &f : runs[c].failures)
            if(log) *log << fmt::format("warning: {}: {}\n", id, f);

        {
            std::ofstream raw(spec.output_dir / (id + ".raw.csv"));
            write_raw(raw, id, runs[c].results);
        }
        write_stats(spec.output_dir / (id + ".stats.json"), stats);
        if(spec.write_records) {
            const auto dir = spec.output_dir / (id + ".records");
            std::filesystem::create_directories(dir);
            for(const auto &r : runs[c].results) {
                std::ofstream os(dir / fmt::format("traj_{}.txt", r.trajectory));
                write_records(os, r);
            }
        }
        if(log)
            *log << fmt::format("{}: S_inf = {:.6f}{} over {} trajectories, peak chi {}, {:.1f} s{}\n", id, stats.s_inf,
                                stats.s_inf_sem ? fmt::format(" +- {:.6f}", *stats.s_inf_sem) : std::string{},
                                stats.n_trajectories, stats.peak_bond, stats.wall_seconds,
                                stats.failed ? " [FAILED]" : "");
        manifest.push_back({{"config_id", id}, {"failed", stats.failed}});
        all.push_back(std::move(stats));
    }
    std::ofstream(spec.output_dir / "manifest.json") << manifest.dump(2) << '\n';
    return all;
}

double parse_angle(const std::string &text) {
    static const std::regex pi_form(R"(^\s*(\d+(?:\.\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$)");
    std::smatch             m;
    if(std::regex_match(text, m, pi_form)) {
        const double num = m[1].matched ? std::stod(m[1].str()) : 1.0;
        const double den = m[2].matched ? std::stod(m[2].str()) : 1.0;
        if(den == 0.0) throw std::invalid_argument(fmt::format("angle '{}' divides by zero", text));
        return num * std::numbers::pi / den;
    }
    std::size_t used = 0;
    double      v    = 0.0;
    try {
        v = std::stod(text, &used);
    } catch(const std::exception &) {
        used = 0;
    }
    if(used == 0 || text.find_first_not_of(" \t", used) != std::string::npos)
        throw std::invalid_argument(fmt::format("cannot parse angle '{}'", text));
    return v;
}

CircuitConfig parse_config(const json &j, const CircuitConfig &base) {
    reject_unknown(j, k_config_keys, "config");
    CircuitConfig c = base;
    auto get = [&](const char *key, auto &field) {
        if(j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("n_qubits", c.n_qubits);
    get("p", c.p);
    if(j.contains("theta")) {
        const auto &t = j.at("theta");
        if(t.is_string()) {
            c.theta       = parse_angle(t.get<std::string>());
            c.theta_label = t.get<std::string>();
        } else {
            c.theta       = t.get<double>();
            c.theta_label = fmt::format("{:.6g}", c.theta);
        }
    }
    get("theta_label", c.theta_label);
    get("chi_max", c.chi_max);
    get("cutoff", c.cutoff);
    get("t_max", c.t_max);
    get("t_cutoff", c.t_cutoff);
    get("master_seed", c.master_seed);
    get("n_trajectories", c.n_trajectories);
    get("seed_group", c.seed_group);
    if(j.contains("order")) c.order = parse_layer_order(j.at("order").get<std::string>());
    if(j.contains("method")) c.method = parse_measurement_method(j.at("method").get<std::string>());
    get("periodic", c.periodic);
    c.validate();
    return c;
}

json config_to_json(const CircuitConfig &c) {
    return {{"n_qubits", c.n_qubits},
            {"p", c.p},
            {"theta", c.theta},
            {"theta_label", c.theta_label},
            {"chi_max", c.chi_max},
            {"cutoff", c.cutoff},
            {"t_max", c.t_max},
            {"t_cutoff", c.t_cutoff},
            {"master_seed", c.master_seed},
            {"n_trajectories", c.n_trajectories},
            {"seed_group", c.seed_group},
            {"order", to_string(c.order)},
            {"method", to_string(c.method)},
            {"periodic", c.periodic}};
}

ExperimentSpec parse_spec(const json &j) {
    reject_unknown(j, {"output_dir", "threads", "write_records", "defaults", "configs", "sweep"}, "spec");
    ExperimentSpec spec;
    if(j.contains("output_dir")) spec.output_dir = j.at("output_dir").get<std::string>();
    if(j.contains("threads")) spec.threads = j.at("threads").get<unsigned>();
    if(j.contains("write_records")) spec.write_records = j.at("write_records").get<bool>();

    json defaults = j.value("defaults", json::object());
    reject_unknown(defaults, k_config_keys, "defaults");
    const bool shared_group = defaults.contains("seed_group");

    std::vector<json> entries;
    if(j.contains("configs")) {
        for(const auto &c : j.at("configs")) {
            json merged = defaults;
            reject_unknown(c, k_config_keys, "config");
            merged.update(c);
            entries.push_back(std::move(merged));
        }
    }
    if(j.contains("sweep")) {
        const auto &sweep = j.at("sweep");
        reject_unknown(sweep, k_config_keys, "sweep");
        std::vector<json> partial{defaults};
        // Expansion order is fixed (theta outermost) so config indices do not
        // depend on key order in the file; scalars apply to every point.
        for(const auto &key : k_sweep_order) {
            if(!sweep.contains(key)) continue;
            const auto &values = sweep.at(key);
            std::vector<json> next;
            const json        list = values.is_array() ? values : json::array({values});
            for(const auto &base : partial)
                for(const auto &v : list) {
                    json e = base;
                    e[key] = v;
                    next.push_back(std::move(e));
                }
            partial = std::move(next);
        }
        entries.insert(entries.end(), partial.begin(), partial.end());
    }
    if(entries.empty()) throw std::invalid_argument("spec lists no configs (need 'configs' or 'sweep')");
    for(std::size_t i = 0; i < entries.size(); ++i) {
        auto c = parse_config(entries[i]);
        if(!shared_group && !entries[i].contains("seed_group")) c.seed_group = i;
        spec.configs.push_back(std::move(c));
    }
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path &path) {
    std::ifstream is(path);
    if(!is) throw std::runtime_error(fmt::format("cannot open spec '{}'", path.string()));
    json j;
    try {
        j = json::parse(is);
    } catch(const json::parse_error &e) {
        throw std::invalid_argument(fmt::format("malformed spec '{}': {}", path.string(), e.what()));
    }
    return parse_spec(j);
}

void write_raw(std::ostream &os, const std::string &id, std::span<const TrajectoryResult> results) {
    os << k_raw_header << '\n';
    for(const auto &r : results)
        for(std::size_t t = 0; t < r.s_mean.size(); ++t)
            os << fmt::format("{},{},{},{:.17g},{:.17g},{:.17g}\n", id, r.trajectory, t + 1, r.s_left[t], r.s_right[t],
                              r.s_mean[t]);
}

std::vector<RawRow> read_raw(std::istream &is) {
    std::string line;
    if(!std::getline(is, line) || line != k_raw_header)
        throw std::invalid_argument(fmt::format("raw file header '{}' does not match '{}'", line, k_raw_header));
    std::vector<RawRow> rows;
    while(std::getline(is, line)) {
        if(line.empty()) continue;
        std::istringstream       ls(line);
        std::vector<std::string> fields;
        std::string              f;
        while(std::getline(ls, f, ',')) fields.push_back(f);
        if(fields.size() != 6) throw std::invalid_argument(fmt::format("raw row '{}' has {} fields", line, fields.size()));
        rows.push_back({fields[0], std::stoull(fields[1]), std::stoull(fields[2]), std::stod(fields[3]),
                        std::stod(fields[4]), std::stod(fields[5])});
    }
    return rows;
}

json stats_to_json(const EnsembleStats &s) {
    json t = json::array(), mean = json::array(), std = json::array(), sem = json::array();
    for(std::size_t k = 0; k < s.per_t.size(); ++k) {
        t.push_back(k + 1);
        mean.push_back(s.per_t[k].mean);
        std.push_back(s.per_t[k].std);
        sem.push_back(optional_json(s.per_t[k].sem));
    }
    return {{"config_id", s.config_id},
            {"config", config_to_json(s.config)},
            {"t", t},
            {"mean", mean},
            {"std", std},
            {"sem", sem},
            {"s_inf", s.s_inf},
            {"s_inf_std", s.s_inf_std},
            {"s_inf_sem", optional_json(s.s_inf_sem)},
            {"n_trajectories", s.n_trajectories},
            {"n_failed", s.n_failed},
            {"failed", s.failed},
            {"failures", s.failures},
            {"peak_bond", s.peak_bond},
            {"wall_seconds", s.wall_seconds}};
}

EnsembleStats stats_from_json(const json &j) {
    EnsembleStats s;
    s.config_id = j.at("config_id").get<std::string>();
    // Stored configs are complete; start from defaults only to satisfy the parser.
    s.config           = parse_config(j.at("config"));
    const auto &mean   = j.at("mean");
    const auto &std    = j.at("std");
    const auto &sem    = j.at("sem");
    if(mean.size() != std.size() || mean.size() != sem.size())
        throw std::invalid_argument("stats arrays differ in length");
    for(std::size_t k = 0; k < mean.size(); ++k)
        s.per_t.push_back({mean[k].get<double>(), std[k].get<double>(), optional_from(sem[k])});
    s.s_inf          = j.at("s_inf").get<double>();
    s.s_inf_std      = j.at("s_inf_std").get<double>();
    s.s_inf_sem      = optional_from(j.at("s_inf_sem"));
    s.n_trajectories = j.at("n_trajectories").get<std::size_t>();
    s.n_failed       = j.at("n_failed").get<std::size_t>();
    s.failed         = j.at("failed").get<bool>();
    s.failures       = j.at("failures").get<std::vector<std::string>>();
    s.peak_bond      = j.at("peak_bond").get<std::size_t>();
    s.wall_seconds   = j.at("wall_seconds").get<double>();
    return s;
}

void write_stats(const std::filesystem::path &path, const EnsembleStats &stats) {
    std::ofstream os(path);
    if(!os) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    os << stats_to_json(stats).dump(2) << '\n';
}

EnsembleStats read_stats(const std::filesystem::path &path) {
    std::ifstream is(path);
    if(!is) throw std::runtime_error(fmt::format("cannot open stats '{}'", path.string()));
    return stats_from_json(json::parse(is));
}

std::string record_line(std::size_t t, int layer, const MeasurementRecord &record) {
    std::string line = fmt::format("{}\t{}", t, layer);
    for(const auto &s : record.sites)
        line += fmt::format("\t{},{},{:.17g}", s.measured ? 1 : 0, s.measured ? s.outcome : -1, s.probability);
    return line;
}

LayerRecord parse_record_line(const std::string &line) {
    std::istringstream is(line);
    LayerRecord        r;
    std::string        field;
    if(!(is >> r.t >> r.layer)) throw std::invalid_argument(fmt::format("bad record line '{}'", line));
    while(is >> field) {
        SiteOutcome s;
        int         measured = 0;
        char        c1 = 0, c2 = 0;
        std::istringstream fs(field);
        if(!(fs >> measured >> c1 >> s.outcome >> c2 >> s.probability) || c1 != ',' || c2 != ',')
            throw std::invalid_argument(fmt::format("bad site triple '{}'", field));
        s.measured = measured != 0;
        r.record.sites.push_back(s);
    }
    return r;
}

void write_records(std::ostream &os, const TrajectoryResult &result) {
    os << "# t\tlayer\tper site: measured,outcome,conditional_probability\n";
    for(const auto &lr : result.records) os << record_line(lr.t, lr.layer, lr.record) << '\n';
}

FitResult fit_scaling(std::span<const ScalingPoint> points, FitModel model) {
    if(points.size() < 2) throw std::invalid_argument("fit needs at least two points");
    FitResult r;
    r.weighted = std::all_of(points.begin(), points.end(), [](const auto &p) { return p.sem && *p.sem > 0.0; });
    const std::size_t n = points.size();
    std::vector<double> x(n), y(n), w(n);
    for(std::size_t i = 0; i < n; ++i) {
        if(model == FitModel::log && !(points[i].n > 0.0)) throw std::invalid_argument("log fit needs N > 0");
        x[i] = model == FitModel::log ? std::log(points[i].n) : points[i].n;
        y[i] = points[i].s_inf;
        w[i] = r.weighted ? 1.0 / (*points[i].sem * *points[i].sem) : 1.0;
    }
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for(std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
        sxx += w[i] * x[i] * x[i];
        sxy += w[i] * x[i] * y[i];
    }
    const double det = sw * sxx - sx * sx;
    if(!(std::abs(det) > 1e-12 * sw * sxx)) throw std::invalid_argument("degenerate fit: all N coincide");
    r.slope     = (sw * sxy - sx * sy) / det;
    r.intercept = (sxx * sy - sx * sxy) / det;
    for(std::size_t i = 0; i < n; ++i) {
        const double res = y[i] - (r.intercept + r.slope * x[i]);
        r.residuals.push_back(res);
        r.chi2 += w[i] * res * res;
    }
    // With known sems the covariance is (X^T W X)^-1; otherwise scale by the residual variance.
    double scale = 1.0;
    if(!r.weighted) scale = n > 2 ? r.chi2 / static_cast<double>(n - 2) : 0.0;
    r.slope_stderr     = std::sqrt(scale * sw / det);
    r.intercept_stderr = std::sqrt(scale * sxx / det);
    return r;
}

std::string to_string(FitModel model) { return model == FitModel::log ? "log" : "linear"; }

FitModel parse_fit_model(const std::string &s) {
    if(s == "log") return FitModel::log;
    if(s == "linear") return FitModel::linear;
    throw std::invalid_argument(fmt::format("unknown fit model '{}'", s));
}

std::vector<ChiScanPoint> chi_convergence_scan(const CircuitConfig &config, std::span<const std::size_t> chis,
                                               unsigned threads) {
    std::vector<CircuitConfig> configs;
    for(auto chi : chis) {
        auto c    = config;
        c.chi_max = chi;
        configs.push_back(c);
    }
    const auto                runs = run_ensembles(configs, threads);
    std::vector<ChiScanPoint> out;
    for(std::size_t i = 0; i < configs.size(); ++i) {
        if(!runs[i].failures.empty())
            throw std::runtime_error(fmt::format("chi={} ensemble had {} failed trajectories: {}", chis[i],
                                                 runs[i].failures.size(), runs[i].failures.front()));
        const auto s = compute_stats(configs[i], runs[i].results);
        out.push_back({chis[i], s.s_inf, s.s_inf_sem, s.peak_bond});
    }
    return out;
}

} // namespace wmps
