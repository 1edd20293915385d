#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hola/gfunction.hpp"

namespace hola {

enum class Family { BernoulliLogit, PoissonLog, GaussianIdentity };

Family family_from_string(const std::string& name);
std::string family_to_string(Family f);

/// Cumulant function b of the exponential family with canonical link.
double family_b(Family f, double eta);
/// k-th derivative of b; available for every order.
double family_b_deriv(Family f, int order, double eta);
/// Part of log f(y | eta) that does not depend on eta.
double family_loglik_const(Family f, double y);

/// Nested grouping of the level-2 clusters into levels 3..L.
struct Hierarchy {
    int levels = 2;                            // L
    int n_level2 = 0;                          // number of level-2 clusters
    std::vector<std::vector<int>> cluster_of;  // [l-3][j] = level-l cluster of cluster j
    std::vector<int> level_counts;             // number of level-l clusters, l = 3..L

    void validate() const;
    /// Smallest l >= 3 with c_l(j) = c_l(k); 0 when the clusters never meet.
    int finest_shared_level(int j, int k) const;
};

/// Exponential-family mixed model with linear predictor X beta + Z u and
/// u ~ N(0, Sigma).  Z is stored by sparse rows.
struct GlmmModel {
    Family family = Family::PoissonLog;
    Eigen::MatrixXd x;                                       // n x p, p may be 0
    Eigen::VectorXd beta;                                    // p
    std::vector<std::vector<std::pair<int, double>>> z_rows; // n sparse rows over d effects
    Eigen::MatrixXd sigma;                                   // d x d, SPD
    Eigen::VectorXd weights;                                 // a_i(phi) > 0
    Eigen::VectorXd y;

    int dim() const { return static_cast<int>(sigma.rows()); }
    int n_obs() const { return static_cast<int>(y.size()); }
    void validate() const;
};

/// The integrand exponent of the model's likelihood:
///   g(u) = sum_i [b(eta_i) - y_i eta_i]/a_i - sum_i c(y_i)
///          + u' Sigma^-1 u / 2 + log((2pi)^d det Sigma) / 2.
///
/// Observations sharing a Z row, fixed-effect offset and weight are folded
/// into one group, so evaluation cost scales with the number of distinct
/// groups rather than n.
class GlmmGFunction : public GFunction {
public:
    explicit GlmmGFunction(GlmmModel model);

    int dim() const override { return model_.dim(); }
    int truncation_order() const override { return 8; }
    double value(const Eigen::VectorXd& u) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override;
    DerivArray deriv_array(int order, const Eigen::VectorXd& u) const override;

    const GlmmModel& model() const { return model_; }

    /// Diagonal of Z'W(u)Z, the data part of the Hessian.
    Eigen::VectorXd data_hessian_diagonal(const Eigen::VectorXd& u) const;

    /// True when the likelihood splits into one 1-D integral per effect:
    /// every row of Z touches one effect and Sigma is diagonal.
    bool factorizable() const;

    /// The terms of g that involve effect j only (its observations, its
    /// prior quadratic, and that coordinate's share of the constants).
    /// Only valid for factorizable objectives.
    std::unique_ptr<GFunction> cluster_objective(int j) const;

    /// Observation count per effect, the default normalizing terms.
    Eigen::VectorXd default_normalizers() const;

private:
    struct Group {
        std::vector<std::pair<int, double>> z;
        double offset = 0.0;   // fixed-effect part of eta
        double weight = 1.0;   // a_i
        double count = 0.0;
        double sum_y = 0.0;
        double sum_const = 0.0;
    };

    double eta_of(const Group& g, const Eigen::VectorXd& u) const;

    GlmmModel model_;
    std::vector<Group> groups_;
    Eigen::MatrixXd sigma_inv_;
    double log_det_sigma_ = 0.0;
    bool indicator_z_ = true;  // every row touches at most one effect
};

/// Row-sum norms of the normalized derivative arrays f^(k), k = 3..max_order,
/// and of the normalized inverse Hessian, all at u_hat.
struct ConditionReport {
    Eigen::VectorXd normalizers;
    std::map<int, double> deriv_norms;
    double inv2_norm = 0.0;
};

ConditionReport check_condition2(const GFunction& g, const Eigen::VectorXd& u_hat,
                                 const Eigen::VectorXd& normalizers, int max_order);

/// Covariance of the collapsed effects v_j = u2_j + sum_l u^(l)_(c_l(j)):
/// entry (j, k) sums the level variances from the finest shared level up.
Eigen::MatrixXd collapsed_covariance(const Hierarchy& h, const std::vector<double>& sigma2);

/// One level of the blockwise rank-1 inversion recursion.
struct StructuredInverseLevel {
    int level = 2;
    Eigen::MatrixXd sigma_inv;  // inverse of the covariance truncated at this level
    Eigen::MatrixXd g_inv;      // inverse of h + sigma_inv at this level
    Eigen::VectorXd r;          // within-cluster row sums of the previous sigma_inv
    Eigen::VectorXd a;          // previous g_inv applied to r
    std::vector<double> s;      // per-cluster sums of r
    std::vector<double> b;      // r' g_inv r per cluster
    std::vector<double> alpha;  // sigma_l^2 / (1 + sigma_l^2 s_c)
};

struct StructuredInverse {
    std::vector<StructuredInverseLevel> levels;  // l = 2 .. L
    const Eigen::MatrixXd& final_g_inverse() const { return levels.back().g_inv; }
    const Eigen::MatrixXd& final_sigma_inverse() const { return levels.back().sigma_inv; }
};

/// Inverse of g''(u_hat) = diag(h) + Sigma^-1 for the collapsed model,
/// computed level by level with Sherman-Morrison rank-1 updates per cluster.
/// data_hessian_diag supplies h_jj.
StructuredInverse structured_inverse(const Hierarchy& h, const std::vector<double>& sigma2,
                                     const Eigen::VectorXd& data_hessian_diag);

}  // namespace hola
