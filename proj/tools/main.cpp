// hola command-line harness: simulate datasets, run Laplace approximations
// against quadrature oracles, and drive the scaling and hierarchy studies.
// Talks to the library exclusively through the C interface.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hola/hola.h"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitOracle = 3;

class CliError : public std::runtime_error {
public:
    CliError(int exit_code, const std::string& message)
        : std::runtime_error(message), exit_code(exit_code) {}
    int exit_code;
};

void check_api(int rc, const std::string& context) {
    if (rc == HOLA_OK) return;
    int exit_code = 1;
    if (rc == HOLA_ERR_PARSE || rc == HOLA_ERR_INVALID_ARGUMENT) exit_code = kExitConfig;
    if (rc == HOLA_ERR_ORACLE) exit_code = kExitOracle;
    throw CliError(exit_code, context + ": " + hola_last_error());
}

struct ModelHandle {
    hola_model* m = nullptr;
    ModelHandle() = default;
    explicit ModelHandle(const std::string& json_text) {
        check_api(hola_model_create_from_json(json_text.c_str(), &m), "config");
    }
    ~ModelHandle() { hola_model_destroy(m); }
    ModelHandle(const ModelHandle&) = delete;
    ModelHandle& operator=(const ModelHandle&) = delete;
};

struct FitHandle {
    hola_fit* f = nullptr;
    FitHandle(const ModelHandle& model, int order) {
        check_api(hola_fit_create(model.m, order, &f), "fit");
    }
    ~FitHandle() { hola_fit_destroy(f); }
    FitHandle(const FitHandle&) = delete;
    FitHandle& operator=(const FitHandle&) = delete;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError(kExitConfig, "cannot open: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw CliError(kExitConfig, path + ": " + e.what());
    }
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n == 0) return std::nan("");
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw CliError(1, "cannot create output directory " + dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw CliError(1, "cannot write " + path);
    out << text;
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const std::string& config_path, std::uint64_t seed_flag, bool seed_given,
                 const std::string& out_dir) {
    json cfg = parse_json_file(config_path);
    std::uint64_t seed = seed_given ? seed_flag : cfg.value("seed", std::uint64_t{1});

    ModelHandle model(cfg.dump());
    check_api(hola_model_simulate(model.m, seed), "simulate");

    ensure_dir(out_dir);
    std::string data_path = out_dir + "/dataset.csv";
    check_api(hola_model_write_csv(model.m, data_path.c_str()), "write dataset");

    int dim = 0, levels = 0;
    int64_t n = 0;
    hola_model_dim(model.m, &dim);
    hola_model_num_obs(model.m, &n);
    hola_model_levels(model.m, &levels);
    json meta = {{"config", cfg},
                 {"seed_used", seed},
                 {"n_obs", n},
                 {"n_clusters", dim},
                 {"levels", levels},
                 {"dataset", "dataset.csv"}};
    write_text(out_dir + "/metadata.json", meta.dump(2) + "\n");

    std::printf("wrote %s (%" PRId64 " rows, %d clusters, seed %" PRIu64 ")\n",
                data_path.c_str(), n, dim, seed);
    return 0;
}

// ------------------------------------------------------------------ approx

struct OracleChoice {
    std::string name = "auto";
    int method() const {
        if (name == "factorized") return HOLA_ORACLE_FACTORIZED;
        if (name == "tensor") return HOLA_ORACLE_TENSOR;
        return HOLA_ORACLE_AUTO;
    }
};

int cmd_approx(const std::string& config_path, const std::string& data_path, int order,
               const OracleChoice& oracle, const std::string& parameterization,
               const std::string& out_dir) {
    json cfg = parse_json_file(config_path);
    ModelHandle model(cfg.dump());
    check_api(hola_model_read_csv(model.m, data_path.c_str()), "dataset");
    if (parameterization == "original")
        check_api(hola_model_set_parameterization(model.m, HOLA_PARAM_ORIGINAL),
                  "parameterization");

    FitHandle fit(model, order);

    int dim = 0, levels = 0;
    int64_t n = 0;
    hola_model_dim(model.m, &dim);
    hola_model_num_obs(model.m, &n);
    hola_model_levels(model.m, &levels);

    std::vector<double> mode(dim);
    check_api(hola_fit_mode(fit.f, mode.data(), dim), "mode");
    double mode_min = mode[0], mode_max = mode[0];
    for (double v : mode) {
        mode_min = std::min(mode_min, v);
        mode_max = std::max(mode_max, v);
    }

    std::ostringstream report;
    report << "model: " << cfg.value("family", "?") << ", levels=" << levels
           << ", effects=" << dim << ", n=" << n
           << ", parameterization=" << parameterization << "\n";
    report << "mode: min=" << fmt(mode_min) << " max=" << fmt(mode_max) << "\n";

    std::vector<double> log_integrals(order + 1, 0.0);
    for (int k = 1; k <= order; ++k) {
        check_api(hola_fit_log_integral(fit.f, k, &log_integrals[k]), "approximation");
        report << "order-" << k << " approximation: " << fmt(log_integrals[k]) << "\n";
    }
    for (int l = 1; l < order; ++l) {
        double e = 0;
        check_api(hola_fit_level_term(fit.f, l, &e), "level term");
        report << "level-" << l << " correction: " << fmt(e) << "\n";
    }

    double deriv_norms[2], inv2_norm = 0;
    check_api(hola_fit_condition_norms(fit.f, 4, deriv_norms, &inv2_norm), "condition norms");
    report << "normalized derivative row-sum norms: order3=" << fmt(deriv_norms[0])
           << " order4=" << fmt(deriv_norms[1]) << " inverse-hessian=" << fmt(inv2_norm)
           << "\n";

    double ell = 0, err = 0;
    if (oracle.name != "none") {
        int rc = hola_model_exact_loglik(model.m, oracle.method(), 0, &ell, &err);
        if (rc == HOLA_OK) {
            report << "oracle log-likelihood: " << fmt(ell) << " (refinement diff "
                   << fmt(err) << ")\n";
            for (int k = 1; k <= order; ++k)
                report << "error of order " << k << ": " << fmt(log_integrals[k] - ell)
                       << "\n";
        } else {
            report << "oracle unavailable: " << hola_last_error() << "\n";
            if (oracle.name != "auto") {
                std::fputs(report.str().c_str(), stdout);
                throw CliError(kExitOracle, "required oracle is infeasible");
            }
        }
    }

    std::fputs(report.str().c_str(), stdout);
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text(out_dir + "/report.txt", report.str());
    }
    return 0;
}

// ------------------------------------------------------------------ scaling

struct ScalingJob {
    int index = 0;
    double pattern_value = 0.0;  // n_j for balanced, d for unbalanced
    std::string pattern;
    std::string sizes_summary;
    int d = 0;
    std::vector<int> cluster_sizes;
    std::uint64_t seed = 0;
};

struct ScalingRow {
    ScalingJob job;
    int k = 0;
    double epsilon = 0.0;
    double bound = 0.0;
    double oracle_err = 0.0;
    bool flagged = false;
    double wall_ms = 0.0;
    std::string failure;
};

std::vector<ScalingRow> run_scaling_jobs(const json& base, const std::vector<ScalingJob>& jobs,
                                         const std::vector<int>& orders, int threads) {
    const int max_order = *std::max_element(orders.begin(), orders.end());
    std::vector<std::vector<ScalingRow>> per_job(jobs.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const ScalingJob& job = jobs[i];
            auto start = std::chrono::steady_clock::now();
            std::vector<ScalingRow> rows;
            try {
                json cfg = base;
                cfg["cluster_sizes"] = job.cluster_sizes;
                ModelHandle model(cfg.dump());
                check_api(hola_model_simulate(model.m, job.seed), "simulate");
                FitHandle fit(model, max_order);
                double ell = 0, err = 0;
                check_api(hola_model_exact_loglik(model.m, HOLA_ORACLE_FACTORIZED, 0, &ell,
                                                  &err),
                          "oracle");
                for (int k : orders) {
                    ScalingRow row;
                    row.job = job;
                    row.k = k;
                    double lk = 0;
                    check_api(hola_fit_log_integral(fit.f, k, &lk), "approximation");
                    row.epsilon = lk - ell;
                    row.oracle_err = err;
                    row.bound = 0.0;
                    for (int nj : job.cluster_sizes)
                        row.bound += std::pow(static_cast<double>(nj), -k);
                    row.flagged = !(std::isfinite(row.epsilon)) ||
                                  !(err < std::abs(row.epsilon) / 10.0);
                    rows.push_back(row);
                }
            } catch (const std::exception& e) {
                ScalingRow row;
                row.job = job;
                row.failure = e.what();
                row.flagged = true;
                rows.assign(1, row);
            }
            double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
            for (auto& r : rows) r.wall_ms = ms;
            per_job[i] = std::move(rows);
        }
    };

    int n_threads = std::max(1, threads);
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<ScalingRow> rows;
    for (auto& chunk : per_job)
        for (auto& r : chunk) rows.push_back(std::move(r));
    return rows;
}

int cmd_scaling(const std::string& config_path, std::uint64_t seed_flag, bool seed_given,
                int threads, const std::string& out_dir) {
    json grid = parse_json_file(config_path);
    if (!grid.contains("base"))
        throw CliError(kExitConfig, "scaling config needs a \"base\" model object");
    json base = grid["base"];
    std::string mode = grid.value("mode", "balanced");
    int replicates = grid.value("replicates", 10);
    std::vector<int> orders = grid.value("orders", std::vector<int>{1, 2});
    std::uint64_t seed = seed_given ? seed_flag : grid.value("seed", std::uint64_t{1});

    std::vector<ScalingJob> jobs;
    if (mode == "balanced") {
        int d = grid.value("d", 20);
        std::vector<int> size_grid = grid.value("cluster_size_grid", std::vector<int>{});
        if (size_grid.empty())
            throw CliError(kExitConfig, "balanced mode needs \"cluster_size_grid\"");
        for (int nj : size_grid)
            for (int rep = 0; rep < replicates; ++rep) {
                ScalingJob job;
                job.index = static_cast<int>(jobs.size());
                job.pattern_value = nj;
                job.pattern = "balanced-n" + std::to_string(nj);
                job.d = d;
                job.cluster_sizes.assign(d, nj);
                job.sizes_summary = std::to_string(d) + "x" + std::to_string(nj);
                job.seed = derive_seed(seed, static_cast<std::uint64_t>(job.index));
                jobs.push_back(std::move(job));
            }
    } else if (mode == "grow-d") {
        int nj = grid.value("cluster_size", 0);
        std::vector<int> d_grid = grid.value("d_grid", std::vector<int>{});
        if (nj <= 0 || d_grid.empty())
            throw CliError(kExitConfig, "grow-d mode needs \"cluster_size\" and \"d_grid\"");
        for (int d : d_grid)
            for (int rep = 0; rep < replicates; ++rep) {
                ScalingJob job;
                job.index = static_cast<int>(jobs.size());
                job.pattern_value = d;
                job.pattern = "growd-d" + std::to_string(d);
                job.d = d;
                job.cluster_sizes.assign(d, nj);
                job.sizes_summary = std::to_string(d) + "x" + std::to_string(nj);
                job.seed = derive_seed(seed, static_cast<std::uint64_t>(job.index));
                jobs.push_back(std::move(job));
            }
    } else if (mode == "unbalanced-log") {
        std::vector<int> d_grid = grid.value("d_grid", std::vector<int>{});
        if (d_grid.empty())
            throw CliError(kExitConfig, "unbalanced-log mode needs \"d_grid\"");
        for (int d : d_grid) {
            int small = static_cast<int>(std::ceil(std::log(static_cast<double>(d))));
            long long total = 10LL * d * small;
            int large = static_cast<int>(total - static_cast<long long>(d - 1) * small);
            for (int rep = 0; rep < replicates; ++rep) {
                ScalingJob job;
                job.index = static_cast<int>(jobs.size());
                job.pattern_value = d;
                job.pattern = "unbal-d" + std::to_string(d);
                job.d = d;
                job.cluster_sizes.assign(d - 1, small);
                job.cluster_sizes.push_back(large);
                job.sizes_summary = std::to_string(d - 1) + "x" + std::to_string(small) +
                                    "+1x" + std::to_string(large);
                job.seed = derive_seed(seed, static_cast<std::uint64_t>(job.index));
                jobs.push_back(std::move(job));
            }
        }
    } else {
        throw CliError(kExitConfig, "unknown scaling mode: " + mode);
    }

    std::vector<ScalingRow> rows = run_scaling_jobs(base, jobs, orders, threads);

    ensure_dir(out_dir);
    std::ostringstream csv;
    csv << "d,pattern,sizes,k,epsilon,bound,oracle_err,seed,flagged\n";
    for (const auto& r : rows) {
        if (!r.failure.empty()) continue;
        csv << r.job.d << "," << r.job.pattern << "," << r.job.sizes_summary << "," << r.k
            << "," << fmt(r.epsilon) << "," << fmt(r.bound) << "," << fmt(r.oracle_err)
            << "," << r.job.seed << "," << (r.flagged ? 1 : 0) << "\n";
    }
    write_text(out_dir + "/scaling_rows.csv", csv.str());

    // medians per (pattern value, k), from unflagged rows
    std::map<std::pair<double, int>, std::vector<double>> by_point;
    std::map<std::pair<double, int>, double> bound_at;
    int excluded = 0, failures = 0;
    for (const auto& r : rows) {
        if (!r.failure.empty()) {
            ++failures;
            continue;
        }
        if (r.flagged) {
            ++excluded;
            continue;
        }
        by_point[{r.job.pattern_value, r.k}].push_back(std::abs(r.epsilon));
        bound_at[{r.job.pattern_value, r.k}] = r.bound;
    }
    std::ostringstream med_csv;
    med_csv << "pattern_value,k,median_abs_epsilon,bound\n";
    for (const auto& [key, values] : by_point)
        med_csv << fmt(key.first) << "," << key.second << "," << fmt(median(values)) << ","
                << fmt(bound_at[key]) << "\n";
    write_text(out_dir + "/scaling_medians.csv", med_csv.str());

    std::ostringstream report;
    report << "scaling study: mode=" << mode << ", jobs=" << jobs.size()
           << ", replicates=" << replicates << ", seed=" << seed << "\n";
    report << "rows flagged (oracle error not below |epsilon|/10): " << excluded << "\n";
    report << "rows failed: " << failures << "\n";
    if (mode == "balanced" || mode == "grow-d") {
        const char* axis = mode == "balanced" ? "n_j" : "d";
        for (int k : orders) {
            std::vector<double> xs, ys;
            for (const auto& [key, values] : by_point) {
                if (key.second != k) continue;
                xs.push_back(std::log(key.first));
                ys.push_back(std::log(median(values)));
            }
            if (xs.size() >= 2) {
                double slope = ls_slope(xs, ys);
                report << "slope of log median|error_k| vs log " << axis << ", k=" << k
                       << ": " << fmt(slope) << "\n";
            }
        }
    } else {
        report << "unbalanced design: cluster sizes grow like 10*d*ceil(log d) total, with "
                  "d-1 clusters of ceil(log d) observations\n";
        bool increasing = true;
        double prev = -1.0;
        for (const auto& [key, values] : by_point) {
            if (key.second != 1) continue;
            double med = median(values);
            report << "median |error_1| at d=" << key.first << ": " << fmt(med) << "\n";
            if (prev >= 0 && med <= prev) increasing = false;
            prev = med;
        }
        report << "median |error_1| strictly increasing in d: " << (increasing ? "yes" : "no")
               << "\n";
    }
    double total_ms = 0.0;
    for (const auto& r : rows) total_ms += r.wall_ms / std::max<std::size_t>(orders.size(), 1);
    report << "total compute time: " << fmt(total_ms) << " ms\n";
    write_text(out_dir + "/scaling_report.txt", report.str());

    std::string plot =
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set key left bottom\n"
        "set xlabel 'grid value (n_j or d)'\n"
        "set ylabel 'median |error|'\n"
        "plot for [k=1:3] 'scaling_medians.csv' using 1:($2==k ? $3 : 1/0) "
        "with linespoints title sprintf('order %d', k), \\\n"
        "     'scaling_medians.csv' using 1:($2==1 ? $4 : 1/0) with lines dt 2 "
        "title 'sum n_j^-k bound'\n";
    write_text(out_dir + "/scaling_plot.gp", plot);

    std::fputs(report.str().c_str(), stdout);
    return 0;
}

// ------------------------------------------------------- hierarchy-compare

int cmd_hierarchy_compare(const std::string& config_path, std::uint64_t seed_flag,
                          bool seed_given, const std::string& out_dir) {
    json cfg = parse_json_file(config_path);
    if (!cfg.contains("base") || !cfg.contains("groupings"))
        throw CliError(kExitConfig, "compare config needs \"base\" and \"groupings\"");
    json base = cfg["base"];
    std::uint64_t seed = seed_given ? seed_flag : cfg.value("seed", std::uint64_t{1});

    std::ostringstream report;
    report << "hierarchy comparison, seed=" << seed << "\n";
    std::vector<double> abs_errors;
    int idx = 0;
    for (const auto& grouping : cfg["groupings"]) {
        json model_cfg = base;
        if (grouping.is_null()) {
            model_cfg.erase("hierarchy");
            // keep only the level-2 variance
            std::vector<double> s2 = model_cfg["sigma2"].get<std::vector<double>>();
            model_cfg["sigma2"] = std::vector<double>{s2.at(0)};
        } else {
            model_cfg["hierarchy"] = grouping;
        }
        ModelHandle model(model_cfg.dump());
        // one shared seed: groupings are compared on matched draws
        check_api(hola_model_simulate(model.m, seed), "simulate");
        FitHandle fit(model, 1);
        double l1 = 0, ell = 0, err = 0;
        check_api(hola_fit_log_integral(fit.f, 1, &l1), "approximation");
        check_api(hola_model_exact_loglik(model.m, HOLA_ORACLE_AUTO, 0, &ell, &err),
                  "oracle");
        double eps = l1 - ell;
        abs_errors.push_back(std::abs(eps));
        report << "grouping " << idx << " ("
               << (grouping.is_null() ? std::string("two-level") : grouping.dump())
               << "): error_1=" << fmt(eps) << " oracle_diff=" << fmt(err) << "\n";
        ++idx;
    }
    if (abs_errors.size() >= 2) {
        double lo = *std::min_element(abs_errors.begin(), abs_errors.end());
        double hi = *std::max_element(abs_errors.begin(), abs_errors.end());
        report << "max/min |error_1| ratio: " << fmt(hi / lo) << "\n";
    }
    std::fputs(report.str().c_str(), stdout);
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_text(out_dir + "/hierarchy_compare.txt", report.str());
    }
    return 0;
}

// ------------------------------------------------------------ bipartitions

int cmd_bipartitions(int max_level, const std::string& out_path) {
    char* csv = nullptr;
    check_api(hola_bipartition_catalog_csv(max_level, &csv), "catalog");
    std::string text(csv);
    hola_free(csv);
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text(out_path, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"higher-order Laplace approximations for mixed-model likelihoods"};
    app.require_subcommand(1);

    std::string config_path, data_path, out_dir, out_file;
    std::uint64_t seed = 0;
    int order = 2;
    int threads = 1;
    int level = 2;
    OracleChoice oracle;
    std::string parameterization = "collapsed";

    auto* sim = app.add_subcommand("simulate", "draw a dataset for a model config");
    sim->add_option("--config", config_path, "model config JSON")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "override the config seed");
    sim->add_option("--out", out_dir, "output directory")->required();

    auto* approx = app.add_subcommand("approx", "run the Laplace approximations on a dataset");
    approx->add_option("--config", config_path, "model config JSON")->required();
    approx->add_option("--data", data_path, "dataset CSV")->required();
    approx->add_option("--order", order, "approximation order (1-3)")
        ->check(CLI::Range(1, 3));
    approx->add_option("--oracle", oracle.name, "oracle: auto, factorized, tensor, none")
        ->check(CLI::IsMember({"auto", "factorized", "tensor", "none"}));
    approx->add_option("--parameterization", parameterization, "collapsed or original")
        ->check(CLI::IsMember({"collapsed", "original"}));
    approx->add_option("--out", out_dir, "also write report.txt here");

    auto* scaling = app.add_subcommand("scaling", "error-scaling study over a grid");
    scaling->add_option("--config", config_path, "grid config JSON")->required();
    auto* sc_seed = scaling->add_option("--seed", seed, "override the config seed");
    scaling->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    scaling->add_option("--out", out_dir, "output directory")->required();

    auto* compare = app.add_subcommand("hierarchy-compare",
                                       "first-order error across alternative groupings");
    compare->add_option("--config", config_path, "comparison config JSON")->required();
    auto* cmp_seed = compare->add_option("--seed", seed, "override the config seed");
    compare->add_option("--out", out_dir, "output directory");

    auto* bip = app.add_subcommand("bipartitions", "dump the bipartition class catalog");
    bip->add_option("--level", level, "highest level to include")->check(CLI::Range(1, 2));
    bip->add_option("--out", out_file, "write CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(config_path, seed, sim_seed->count() > 0, out_dir);
        if (approx->parsed())
            return cmd_approx(config_path, data_path, order, oracle, parameterization,
                              out_dir);
        if (scaling->parsed())
            return cmd_scaling(config_path, seed, sc_seed->count() > 0, threads, out_dir);
        if (compare->parsed())
            return cmd_hierarchy_compare(config_path, seed, cmp_seed->count() > 0, out_dir);
        if (bip->parsed()) return cmd_bipartitions(level, out_file);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
