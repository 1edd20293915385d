#include "hola/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hola/rng.hpp"

namespace hola {

using nlohmann::json;

namespace {

int nesting_depth(const json& node) {
    if (!node.is_array()) return 0;
    int depth = 0;
    for (const auto& child : node) depth = std::max(depth, nesting_depth(child));
    return depth + 1;
}

Hierarchy parse_hierarchy(const json& node, int n_level2) {
    Hierarchy h;
    h.n_level2 = n_level2;
    if (node.is_null()) {
        h.levels = 2;
        return h;
    }
    if (!node.is_array() || node.empty())
        throw ConfigError("hierarchy must be a non-empty array");

    // Leaves (level-2 cluster ids) sit depth-1 arrays deep; each enclosing
    // array layer is one extra level of grouping.
    const int depth = nesting_depth(node);
    h.levels = depth + 1;
    const int internal = depth - 1;  // grouping levels 3..L
    h.cluster_of.assign(internal, std::vector<int>(n_level2, -1));
    h.level_counts.assign(internal, 0);

    std::vector<int> path_ids(std::max(internal, 1), -1);
    std::vector<int> next_id(std::max(internal, 1), 0);
    std::vector<bool> seen(n_level2, false);

    std::function<void(const json&, int)> walk = [&](const json& n, int d) {
        if (d == depth - 1) {
            if (!n.is_number_integer())
                throw ConfigError("hierarchy leaves must be level-2 cluster ids");
            int j = n.get<int>();
            if (j < 0 || j >= n_level2)
                throw ConfigError("hierarchy references unknown level-2 cluster " +
                                  std::to_string(j));
            if (seen[j]) throw ConfigError("level-2 cluster listed twice in hierarchy");
            seen[j] = true;
            for (int i = 0; i < internal; ++i) {
                int level = h.levels - i;  // tree depth i holds level L - i
                h.cluster_of[level - 3][j] = path_ids[i];
            }
            return;
        }
        if (!n.is_array() || n.empty())
            throw ConfigError("hierarchy nodes must be non-empty arrays down to cluster ids");
        path_ids[d] = next_id[d]++;
        for (const auto& child : n) walk(child, d + 1);
    };
    for (const auto& top : node) walk(top, 0);

    for (int i = 0; i < internal; ++i) h.level_counts[h.levels - (i + 3)] = next_id[i];
    for (int j = 0; j < n_level2; ++j)
        if (!seen[j])
            throw ConfigError("level-2 cluster " + std::to_string(j) +
                              " missing from hierarchy");
    h.validate();
    return h;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

int ModelConfig::n_obs() const {
    return std::accumulate(cluster_sizes.begin(), cluster_sizes.end(), 0);
}

void ModelConfig::validate() const {
    if (cluster_sizes.empty()) throw ConfigError("cluster_sizes must be non-empty");
    for (int s : cluster_sizes)
        if (s < 0) throw ConfigError("cluster sizes must be non-negative");
    if (sigma2.empty()) throw ConfigError("sigma2 must list at least the level-2 variance");
    if (!(sigma2[0] > 0.0)) throw ConfigError("level-2 variance must be positive");
    for (std::size_t i = 1; i < sigma2.size(); ++i)
        if (sigma2[i] < 0.0) throw ConfigError("variances must be non-negative");
    if (static_cast<int>(sigma2.size()) != hierarchy.levels - 1)
        throw ConfigError("sigma2 must have one entry per level 2..L (got " +
                          std::to_string(sigma2.size()) + " for L = " +
                          std::to_string(hierarchy.levels) + ")");
    if (hierarchy.n_level2 != n_clusters())
        throw ConfigError("hierarchy and cluster_sizes disagree on the cluster count");
    hierarchy.validate();
}

ModelConfig parse_model_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ModelConfig cfg;
    try {
        if (!j.contains("family")) throw ConfigError("config missing \"family\"");
        cfg.family = family_from_string(j.at("family").get<std::string>());
        if (j.contains("beta")) {
            auto b = j.at("beta").get<std::vector<double>>();
            cfg.beta = Eigen::Map<Eigen::VectorXd>(b.data(), static_cast<int>(b.size()));
        }
        if (!j.contains("sigma2")) throw ConfigError("config missing \"sigma2\"");
        cfg.sigma2 = j.at("sigma2").get<std::vector<double>>();
        if (!j.contains("cluster_sizes")) throw ConfigError("config missing \"cluster_sizes\"");
        cfg.cluster_sizes = j.at("cluster_sizes").get<std::vector<int>>();
        cfg.hierarchy = parse_hierarchy(j.contains("hierarchy") ? j.at("hierarchy") : json(),
                                        static_cast<int>(cfg.cluster_sizes.size()));
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ModelConfig load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_config(ss.str());
}

Dataset simulate_dataset(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    const int d = config.n_clusters();
    const int n = config.n_obs();
    const int L = config.hierarchy.levels;

    // Separate streams per draw category, so adding a zero-variance level or
    // covariates never shifts the other draws.
    Rng effect2_rng(Rng::mix(seed, 2));
    Rng covariate_rng(Rng::mix(seed, 1000));
    Rng response_rng(Rng::mix(seed, 2000));

    Eigen::VectorXd level2(d);
    for (int j = 0; j < d; ++j) level2[j] = std::sqrt(config.sigma2[0]) * effect2_rng.normal();
    std::vector<Eigen::VectorXd> higher;
    for (int l = 3; l <= L; ++l) {
        Rng rng(Rng::mix(seed, l));
        Eigen::VectorXd u(config.hierarchy.level_counts[l - 3]);
        for (int c = 0; c < u.size(); ++c) u[c] = std::sqrt(config.sigma2[l - 2]) * rng.normal();
        higher.push_back(std::move(u));
    }

    Dataset data;
    data.cluster2.reserve(n);
    for (int j = 0; j < d; ++j)
        for (int r = 0; r < config.cluster_sizes[j]; ++r) data.cluster2.push_back(j);

    const int n_cov = std::max<int>(0, static_cast<int>(config.beta.size()) - 1);
    data.covariates.resize(n, n_cov);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < n_cov; ++c) data.covariates(i, c) = covariate_rng.normal();

    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        int j = data.cluster2[i];
        double eta = config.beta.size() > 0 ? config.beta[0] : 0.0;
        for (int c = 0; c < n_cov; ++c) eta += config.beta[c + 1] * data.covariates(i, c);
        eta += level2[j];
        for (int l = 3; l <= L; ++l) eta += higher[l - 3][config.hierarchy.cluster_of[l - 3][j]];
        switch (config.family) {
            case Family::PoissonLog:
                data.y[i] = static_cast<double>(response_rng.poisson(std::exp(eta)));
                break;
            case Family::BernoulliLogit:
                data.y[i] = response_rng.bernoulli(1.0 / (1.0 + std::exp(-eta)));
                break;
            case Family::GaussianIdentity:
                data.y[i] = eta + response_rng.normal();
                break;
        }
    }
    return data;
}

void write_dataset_csv(const ModelConfig& config, const Dataset& data,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open dataset file for writing: " + path);
    const int L = config.hierarchy.levels;
    const int n_cov = static_cast<int>(data.covariates.cols());
    out << "y,cluster2";
    for (int l = 3; l <= L; ++l) out << ",cluster" << l;
    for (int c = 0; c < n_cov; ++c) out << ",x" << (c + 1);
    out << "\n";
    for (int i = 0; i < data.y.size(); ++i) {
        int j = data.cluster2[i];
        out << format_double(data.y[i]) << "," << j;
        for (int l = 3; l <= L; ++l) out << "," << config.hierarchy.cluster_of[l - 3][j];
        for (int c = 0; c < n_cov; ++c) out << "," << format_double(data.covariates(i, c));
        out << "\n";
    }
    if (!out) throw ConfigError("failed writing dataset file: " + path);
}

Dataset read_dataset_csv(const ModelConfig& config, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("dataset file is empty: " + path);
    auto header = split_csv_line(line);

    auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    };
    int col_y = column("y");
    int col_c2 = column("cluster2");
    if (col_y < 0 || col_c2 < 0)
        throw ConfigError("dataset must have 'y' and 'cluster2' columns");
    const int n_cov = std::max<int>(0, static_cast<int>(config.beta.size()) - 1);
    std::vector<int> cov_cols(n_cov);
    for (int c = 0; c < n_cov; ++c) {
        cov_cols[c] = column("x" + std::to_string(c + 1));
        if (cov_cols[c] < 0)
            throw ConfigError("dataset missing covariate column x" + std::to_string(c + 1));
    }
    const int L = config.hierarchy.levels;
    std::vector<int> level_cols(std::max(0, L - 2), -1);
    for (int l = 3; l <= L; ++l) level_cols[l - 3] = column("cluster" + std::to_string(l));

    std::vector<double> ys;
    std::vector<int> c2;
    std::vector<std::vector<double>> covs;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ConfigError("dataset line " + std::to_string(line_no) +
                              " has wrong field count");
        try {
            ys.push_back(std::stod(fields[col_y]));
            int j = std::stoi(fields[col_c2]);
            if (j < 0 || j >= config.n_clusters())
                throw ConfigError("dataset line " + std::to_string(line_no) +
                                  ": cluster2 out of range");
            c2.push_back(j);
            for (int l = 3; l <= L; ++l) {
                if (level_cols[l - 3] < 0) continue;
                int c = std::stoi(fields[level_cols[l - 3]]);
                if (c != config.hierarchy.cluster_of[l - 3][j])
                    throw ConfigError("dataset line " + std::to_string(line_no) +
                                      ": cluster" + std::to_string(l) +
                                      " disagrees with the configured hierarchy");
            }
            std::vector<double> row(n_cov);
            for (int c = 0; c < n_cov; ++c) row[c] = std::stod(fields[cov_cols[c]]);
            covs.push_back(std::move(row));
        } catch (const std::invalid_argument&) {
            throw ConfigError("dataset line " + std::to_string(line_no) + ": bad number");
        }
    }

    const int n = static_cast<int>(ys.size());
    if (n != config.n_obs())
        throw ConfigError("dataset has " + std::to_string(n) + " rows but config expects " +
                          std::to_string(config.n_obs()));
    std::vector<int> counts(config.n_clusters(), 0);
    for (int j : c2) ++counts[j];
    for (int j = 0; j < config.n_clusters(); ++j)
        if (counts[j] != config.cluster_sizes[j])
            throw ConfigError("cluster " + std::to_string(j) + " has " +
                              std::to_string(counts[j]) + " rows but config expects " +
                              std::to_string(config.cluster_sizes[j]));

    Dataset data;
    data.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
    data.cluster2 = std::move(c2);
    data.covariates.resize(n, n_cov);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < n_cov; ++c) data.covariates(i, c) = covs[i][c];
    return data;
}

namespace {

Eigen::MatrixXd design_matrix(const ModelConfig& config, const Dataset& data) {
    const int n = static_cast<int>(data.y.size());
    const int p = static_cast<int>(config.beta.size());
    Eigen::MatrixXd x(n, p);
    if (p > 0) {
        x.col(0).setOnes();
        for (int c = 1; c < p; ++c) x.col(c) = data.covariates.col(c - 1);
    }
    return x;
}

void check_dataset(const ModelConfig& config, const Dataset& data) {
    if (data.y.size() != config.n_obs())
        throw ConfigError("dataset size does not match config");
    if (static_cast<int>(data.cluster2.size()) != data.y.size())
        throw ConfigError("cluster assignments do not match y");
}

}  // namespace

GlmmModel build_collapsed_model(const ModelConfig& config, const Dataset& data) {
    config.validate();
    check_dataset(config, data);
    const int n = static_cast<int>(data.y.size());
    GlmmModel m;
    m.family = config.family;
    m.beta = config.beta;
    m.x = design_matrix(config, data);
    m.y = data.y;
    m.weights = Eigen::VectorXd::Ones(n);
    m.z_rows.resize(n);
    for (int i = 0; i < n; ++i) m.z_rows[i] = {{data.cluster2[i], 1.0}};
    if (config.hierarchy.levels == 2)
        m.sigma = config.sigma2[0] *
                  Eigen::MatrixXd::Identity(config.n_clusters(), config.n_clusters());
    else
        m.sigma = collapsed_covariance(config.hierarchy, config.sigma2);
    return m;
}

GlmmModel build_original_model(const ModelConfig& config, const Dataset& data) {
    config.validate();
    check_dataset(config, data);
    const int n = static_cast<int>(data.y.size());
    const int d = config.n_clusters();
    const int L = config.hierarchy.levels;

    int total = d;
    std::vector<int> offsets;
    for (int l = 3; l <= L; ++l) {
        offsets.push_back(total);
        total += config.hierarchy.level_counts[l - 3];
    }

    GlmmModel m;
    m.family = config.family;
    m.beta = config.beta;
    m.x = design_matrix(config, data);
    m.y = data.y;
    m.weights = Eigen::VectorXd::Ones(n);
    m.z_rows.resize(n);
    for (int i = 0; i < n; ++i) {
        int j = data.cluster2[i];
        auto& row = m.z_rows[i];
        row.push_back({j, 1.0});
        for (int l = 3; l <= L; ++l)
            row.push_back({offsets[l - 3] + config.hierarchy.cluster_of[l - 3][j], 1.0});
    }
    Eigen::VectorXd diag(total);
    diag.head(d).setConstant(config.sigma2[0]);
    for (int l = 3; l <= L; ++l)
        diag.segment(offsets[l - 3], config.hierarchy.level_counts[l - 3])
            .setConstant(config.sigma2[l - 2]);
    m.sigma = diag.asDiagonal();
    return m;
}

}  // namespace hola
