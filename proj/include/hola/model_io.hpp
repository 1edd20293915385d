#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hola/glmm.hpp"

namespace hola {

/// Raised for malformed configuration or dataset files.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed model specification.
///
/// JSON schema:
///   family        "poisson-log" | "bernoulli-logit" | "gaussian-identity"
///   beta          array of fixed-effect coefficients (first is intercept);
///                 may be empty
///   sigma2        array of per-level variances [sigma_2^2, ..., sigma_L^2]
///   cluster_sizes array of observation counts per level-2 cluster
///   hierarchy     nested arrays grouping level-2 cluster ids into higher
///                 levels, e.g. [[0,1],[2,3]] for two level-3 clusters;
///                 omit for a two-level model
///   seed          unsigned integer (optional, default 1)
struct ModelConfig {
    Family family = Family::PoissonLog;
    Eigen::VectorXd beta;
    std::vector<double> sigma2;
    std::vector<int> cluster_sizes;
    Hierarchy hierarchy;
    std::uint64_t seed = 1;

    int n_obs() const;
    int n_clusters() const { return static_cast<int>(cluster_sizes.size()); }
    void validate() const;
};

ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::string& path);

/// Simulated or loaded observations.  covariates has one column per
/// non-intercept fixed effect (beta.size() - 1 columns, or none).
struct Dataset {
    Eigen::VectorXd y;
    std::vector<int> cluster2;
    Eigen::MatrixXd covariates;
};

/// Draw effects and responses for the configured design; deterministic in
/// the seed.  Effects per level, covariates and responses use independent
/// sub-streams of the seed, so a zero-variance level leaves the remaining
/// draws untouched.
Dataset simulate_dataset(const ModelConfig& config, std::uint64_t seed);

void write_dataset_csv(const ModelConfig& config, const Dataset& data,
                       const std::string& path);
Dataset read_dataset_csv(const ModelConfig& config, const std::string& path);

/// Collapsed parameterization: one effect per level-2 cluster with the
/// structured covariance implied by the hierarchy.
GlmmModel build_collapsed_model(const ModelConfig& config, const Dataset& data);

/// Original parameterization: separate intercepts for every level, with
/// block-diagonal covariance.  Identical likelihood to the collapsed form.
GlmmModel build_original_model(const ModelConfig& config, const Dataset& data);

}  // namespace hola
