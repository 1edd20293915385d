#include "hola/glmm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hola {

namespace {

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    double e = std::exp(eta);
    return e / (1.0 + e);
}

double softplus(double eta) {
    if (eta > 30.0) return eta + std::exp(-eta);
    if (eta < -30.0) return std::exp(eta);
    return std::log1p(std::exp(eta));
}

// b^(k) for the logit link is a polynomial in mu = sigmoid(eta):
// b' = mu and b^(k+1) = (d b^(k)/d mu) * mu (1 - mu).
const std::vector<double>& logit_deriv_poly(int order) {
    static std::vector<std::vector<double>> polys = [] {
        std::vector<std::vector<double>> p;
        p.push_back({0.0, 1.0});  // order 1: mu
        for (int k = 1; k < 12; ++k) {
            const auto& prev = p.back();
            // derivative in mu
            std::vector<double> der(prev.size() - 1, 0.0);
            for (std::size_t i = 1; i < prev.size(); ++i)
                der[i - 1] = prev[i] * static_cast<double>(i);
            // multiply by (mu - mu^2)
            std::vector<double> next(der.size() + 2, 0.0);
            for (std::size_t i = 0; i < der.size(); ++i) {
                next[i + 1] += der[i];
                next[i + 2] -= der[i];
            }
            p.push_back(std::move(next));
        }
        return p;
    }();
    if (order < 1 || order > static_cast<int>(polys.size()))
        throw std::invalid_argument("logit derivative order out of range");
    return polys[order - 1];
}

double eval_poly(const std::vector<double>& coeffs, double x) {
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
    return v;
}

}  // namespace

Family family_from_string(const std::string& name) {
    if (name == "bernoulli-logit") return Family::BernoulliLogit;
    if (name == "poisson-log") return Family::PoissonLog;
    if (name == "gaussian-identity") return Family::GaussianIdentity;
    throw std::invalid_argument("unknown family: " + name);
}

std::string family_to_string(Family f) {
    switch (f) {
        case Family::BernoulliLogit: return "bernoulli-logit";
        case Family::PoissonLog: return "poisson-log";
        case Family::GaussianIdentity: return "gaussian-identity";
    }
    return "?";
}

double family_b(Family f, double eta) {
    switch (f) {
        case Family::BernoulliLogit: return softplus(eta);
        case Family::PoissonLog: return std::exp(eta);
        case Family::GaussianIdentity: return 0.5 * eta * eta;
    }
    return 0.0;
}

double family_b_deriv(Family f, int order, double eta) {
    if (order < 1) throw std::invalid_argument("derivative order must be >= 1");
    switch (f) {
        case Family::BernoulliLogit:
            return eval_poly(logit_deriv_poly(order), sigmoid(eta));
        case Family::PoissonLog:
            return std::exp(eta);
        case Family::GaussianIdentity:
            if (order == 1) return eta;
            return order == 2 ? 1.0 : 0.0;
    }
    return 0.0;
}

double family_loglik_const(Family f, double y) {
    switch (f) {
        case Family::BernoulliLogit: return 0.0;
        case Family::PoissonLog: return -std::lgamma(y + 1.0);
        case Family::GaussianIdentity:
            return -0.5 * y * y - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    return 0.0;
}

void Hierarchy::validate() const {
    if (levels < 2) throw std::invalid_argument("hierarchy needs at least 2 levels");
    if (static_cast<int>(cluster_of.size()) != levels - 2 ||
        static_cast<int>(level_counts.size()) != levels - 2)
        throw std::invalid_argument("hierarchy level maps inconsistent with level count");
    for (int li = 0; li < levels - 2; ++li) {
        const auto& map = cluster_of[li];
        if (static_cast<int>(map.size()) != n_level2)
            throw std::invalid_argument("cluster map has wrong length");
        for (int c : map)
            if (c < 0 || c >= level_counts[li])
                throw std::invalid_argument("cluster index out of range");
    }
    // Nesting: equality at level l must imply equality at level l+1.
    for (int li = 0; li + 1 < levels - 2; ++li) {
        std::vector<int> parent(level_counts[li], -1);
        for (int j = 0; j < n_level2; ++j) {
            int c = cluster_of[li][j];
            int p = cluster_of[li + 1][j];
            if (parent[c] == -1)
                parent[c] = p;
            else if (parent[c] != p)
                throw std::invalid_argument("clusters are not nested");
        }
    }
}

int Hierarchy::finest_shared_level(int j, int k) const {
    for (int li = 0; li < levels - 2; ++li)
        if (cluster_of[li][j] == cluster_of[li][k]) return li + 3;
    return 0;
}

void GlmmModel::validate() const {
    const int n = n_obs();
    if (static_cast<int>(z_rows.size()) != n)
        throw std::invalid_argument("Z row count does not match y");
    if (x.size() > 0 && x.rows() != n)
        throw std::invalid_argument("X row count does not match y");
    if (x.cols() != beta.size())
        throw std::invalid_argument("beta length does not match X columns");
    if (weights.size() != n) throw std::invalid_argument("weight count does not match y");
    for (int i = 0; i < n; ++i)
        if (!(weights[i] > 0.0)) throw std::invalid_argument("dispersion weights must be positive");
    if (sigma.rows() != sigma.cols()) throw std::invalid_argument("Sigma must be square");
    const int d = dim();
    for (const auto& row : z_rows)
        for (const auto& [j, v] : row) {
            (void)v;
            if (j < 0 || j >= d) throw std::invalid_argument("Z column out of range");
        }
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("Sigma is not positive definite");
}

GlmmGFunction::GlmmGFunction(GlmmModel model) : model_(std::move(model)) {
    model_.validate();
    const int n = model_.n_obs();

    Eigen::LLT<Eigen::MatrixXd> llt(model_.sigma);
    const Eigen::MatrixXd l = llt.matrixL();
    log_det_sigma_ = 0.0;
    for (int i = 0; i < l.rows(); ++i) log_det_sigma_ += 2.0 * std::log(l(i, i));
    sigma_inv_ = llt.solve(Eigen::MatrixXd::Identity(model_.dim(), model_.dim()));
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();

    // Fold observations with identical (z row, offset, weight) together.
    std::map<std::tuple<std::vector<std::pair<int, double>>, double, double>, Group> grouped;
    for (int i = 0; i < n; ++i) {
        std::vector<std::pair<int, double>> z;
        for (const auto& entry : model_.z_rows[i])
            if (entry.second != 0.0) z.push_back(entry);
        std::sort(z.begin(), z.end());
        double offset = model_.x.cols() > 0 ? model_.x.row(i).dot(model_.beta) : 0.0;
        double w = model_.weights[i];
        auto key = std::make_tuple(z, offset, w);
        auto it = grouped.find(key);
        if (it == grouped.end()) {
            Group g;
            g.z = z;
            g.offset = offset;
            g.weight = w;
            it = grouped.emplace(std::move(key), std::move(g)).first;
        }
        Group& g = it->second;
        g.count += 1.0;
        g.sum_y += model_.y[i];
        g.sum_const += family_loglik_const(model_.family, model_.y[i]);
        if (z.size() > 1) indicator_z_ = false;
    }
    groups_.reserve(grouped.size());
    for (auto& [key, g] : grouped) groups_.push_back(std::move(g));
}

double GlmmGFunction::eta_of(const Group& g, const Eigen::VectorXd& u) const {
    double eta = g.offset;
    for (const auto& [j, v] : g.z) eta += v * u[j];
    return eta;
}

double GlmmGFunction::value(const Eigen::VectorXd& u) const {
    double h = 0.0;
    for (const auto& g : groups_) {
        double eta = eta_of(g, u);
        h += (g.count * family_b(model_.family, eta) - g.sum_y * eta) / g.weight;
        h -= g.sum_const;
    }
    double prior = 0.5 * u.dot(sigma_inv_ * u) +
                   0.5 * (model_.dim() * std::log(2.0 * std::numbers::pi) + log_det_sigma_);
    return h + prior;
}

Eigen::VectorXd GlmmGFunction::gradient(const Eigen::VectorXd& u) const {
    Eigen::VectorXd grad = sigma_inv_ * u;
    for (const auto& g : groups_) {
        double eta = eta_of(g, u);
        double s = (g.count * family_b_deriv(model_.family, 1, eta) - g.sum_y) / g.weight;
        for (const auto& [j, v] : g.z) grad[j] += s * v;
    }
    return grad;
}

DerivArray GlmmGFunction::deriv_array(int order, const Eigen::VectorXd& u) const {
    const int d = model_.dim();
    if (order == 2) {
        Eigen::MatrixXd h = sigma_inv_;
        for (const auto& g : groups_) {
            double w = g.count * family_b_deriv(model_.family, 2, eta_of(g, u)) / g.weight;
            if (w == 0.0) continue;
            for (const auto& [j, vj] : g.z)
                for (const auto& [k, vk] : g.z) h(j, k) += w * vj * vk;
        }
        return DerivArray::dense(h);
    }
    if (order < 2 || order > truncation_order())
        throw std::invalid_argument("derivative order outside truncation");

    if (indicator_z_) {
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
        for (const auto& g : groups_) {
            if (g.z.empty()) continue;
            double w = g.count * family_b_deriv(model_.family, order, eta_of(g, u)) / g.weight;
            diag[g.z[0].first] += w * std::pow(g.z[0].second, order);
        }
        return DerivArray::diagonal(order, std::move(diag));
    }
    std::vector<OuterTerm> terms;
    terms.reserve(groups_.size());
    for (const auto& g : groups_) {
        double w = g.count * family_b_deriv(model_.family, order, eta_of(g, u)) / g.weight;
        if (w == 0.0) continue;
        OuterTerm t;
        t.weight = w;
        t.factor = Eigen::VectorXd::Zero(d);
        for (const auto& [j, v] : g.z) t.factor[j] = v;
        terms.push_back(std::move(t));
    }
    return DerivArray::outer_sum(order, d, std::move(terms));
}

Eigen::VectorXd GlmmGFunction::data_hessian_diagonal(const Eigen::VectorXd& u) const {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(model_.dim());
    for (const auto& g : groups_) {
        double w = g.count * family_b_deriv(model_.family, 2, eta_of(g, u)) / g.weight;
        for (const auto& [j, v] : g.z) diag[j] += w * v * v;
    }
    return diag;
}

bool GlmmGFunction::factorizable() const {
    for (const auto& g : groups_)
        if (g.z.size() != 1) return false;
    for (int i = 0; i < model_.dim(); ++i)
        for (int j = 0; j < model_.dim(); ++j)
            if (i != j && model_.sigma(i, j) != 0.0) return false;
    return true;
}

namespace {

/// One coordinate's share of a factorizable objective.
class ClusterObjective final : public GFunction {
public:
    struct Term {
        double z, offset, weight, count, sum_y;
    };

    ClusterObjective(Family family, std::vector<Term> terms, double sigma2, double const_sum)
        : family_(family), terms_(std::move(terms)), sigma2_(sigma2), const_sum_(const_sum) {}

    int dim() const override { return 1; }
    int truncation_order() const override { return 8; }

    double value(const Eigen::VectorXd& u) const override {
        double t = u[0], h = -const_sum_;
        for (const auto& g : terms_) {
            double eta = g.offset + g.z * t;
            h += (g.count * family_b(family_, eta) - g.sum_y * eta) / g.weight;
        }
        return h + 0.5 * t * t / sigma2_ + 0.5 * std::log(2.0 * std::numbers::pi * sigma2_);
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override {
        double t = u[0], s = t / sigma2_;
        for (const auto& g : terms_) {
            double eta = g.offset + g.z * t;
            s += g.z * (g.count * family_b_deriv(family_, 1, eta) - g.sum_y) / g.weight;
        }
        Eigen::VectorXd grad(1);
        grad[0] = s;
        return grad;
    }

    DerivArray deriv_array(int order, const Eigen::VectorXd& u) const override {
        double t = u[0], s = order == 2 ? 1.0 / sigma2_ : 0.0;
        for (const auto& g : terms_) {
            double eta = g.offset + g.z * t;
            s += std::pow(g.z, order) * g.count * family_b_deriv(family_, order, eta) / g.weight;
        }
        Eigen::VectorXd diag(1);
        diag[0] = s;
        return DerivArray::diagonal(order, std::move(diag));
    }

private:
    Family family_;
    std::vector<Term> terms_;
    double sigma2_;
    double const_sum_;
};

}  // namespace

std::unique_ptr<GFunction> GlmmGFunction::cluster_objective(int j) const {
    if (!factorizable())
        throw std::logic_error("objective does not factorize over effects");
    if (j < 0 || j >= model_.dim()) throw std::invalid_argument("effect index out of range");
    std::vector<ClusterObjective::Term> local;
    double const_sum = 0.0;
    for (const auto& g : groups_) {
        if (g.z[0].first != j) continue;
        local.push_back({g.z[0].second, g.offset, g.weight, g.count, g.sum_y});
        const_sum += g.sum_const;
    }
    return std::make_unique<ClusterObjective>(model_.family, std::move(local),
                                              model_.sigma(j, j), const_sum);
}

Eigen::VectorXd GlmmGFunction::default_normalizers() const {
    Eigen::VectorXd n = Eigen::VectorXd::Zero(model_.dim());
    for (const auto& g : groups_)
        for (const auto& [j, v] : g.z)
            if (v != 0.0) n[j] += g.count;
    return n;
}

ConditionReport check_condition2(const GFunction& g, const Eigen::VectorXd& u_hat,
                                 const Eigen::VectorXd& normalizers, int max_order) {
    if (max_order < 3) throw std::invalid_argument("max_order must be >= 3");
    ConditionReport report;
    report.normalizers = normalizers;

    Eigen::MatrixXd h = g.hessian(u_hat);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("Hessian at u_hat is singular or indefinite");
    Eigen::MatrixXd h_inv = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
    Eigen::MatrixXd f_inv = normalize_inverse2(h_inv, normalizers);
    std::vector<double> flat(f_inv.size());
    for (int i = 0; i < f_inv.rows(); ++i)
        for (int j = 0; j < f_inv.cols(); ++j)
            flat[static_cast<std::size_t>(i) * f_inv.cols() + j] = f_inv(i, j);
    report.inv2_norm = row_sum_norms_dense(flat.data(), 2, static_cast<int>(f_inv.rows())).max_norm;

    for (int k = 3; k <= max_order; ++k) {
        DerivArray f = normalize_deriv(g.deriv_array(k, u_hat), normalizers);
        report.deriv_norms[k] = row_sum_norms(f).max_norm;
    }
    return report;
}

Eigen::MatrixXd collapsed_covariance(const Hierarchy& h, const std::vector<double>& sigma2) {
    h.validate();
    if (static_cast<int>(sigma2.size()) != h.levels - 1)
        throw std::invalid_argument("need one variance per level 2..L");
    const int d = h.n_level2;
    // suffix[li] = sigma_l^2 + ... + sigma_L^2 with li indexing level l.
    std::vector<double> suffix(sigma2.size() + 1, 0.0);
    for (int i = static_cast<int>(sigma2.size()) - 1; i >= 0; --i)
        suffix[i] = suffix[i + 1] + sigma2[i];

    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j) {
        s(j, j) = suffix[0];
        for (int k = j + 1; k < d; ++k) {
            int l = h.finest_shared_level(j, k);
            double v = l == 0 ? 0.0 : suffix[l - 2];
            s(j, k) = s(k, j) = v;
        }
    }
    return s;
}

StructuredInverse structured_inverse(const Hierarchy& h, const std::vector<double>& sigma2,
                                     const Eigen::VectorXd& data_hessian_diag) {
    h.validate();
    if (static_cast<int>(sigma2.size()) != h.levels - 1)
        throw std::invalid_argument("need one variance per level 2..L");
    const int d = h.n_level2;
    if (data_hessian_diag.size() != d)
        throw std::invalid_argument("data Hessian diagonal has wrong length");
    if (!(sigma2[0] > 0.0)) throw std::invalid_argument("level-2 variance must be positive");

    StructuredInverse out;
    StructuredInverseLevel base;
    base.level = 2;
    base.sigma_inv = Eigen::MatrixXd::Identity(d, d) / sigma2[0];
    base.g_inv = Eigen::MatrixXd::Zero(d, d);
    for (int j = 0; j < d; ++j)
        base.g_inv(j, j) = 1.0 / (data_hessian_diag[j] + 1.0 / sigma2[0]);
    out.levels.push_back(std::move(base));

    for (int l = 3; l <= h.levels; ++l) {
        const double var = sigma2[l - 2];
        const auto& map = h.cluster_of[l - 3];
        const int n_clusters = h.level_counts[l - 3];
        const StructuredInverseLevel& prev = out.levels.back();

        std::vector<std::vector<int>> members(n_clusters);
        for (int j = 0; j < d; ++j) members[map[j]].push_back(j);

        StructuredInverseLevel cur;
        cur.level = l;
        cur.r = Eigen::VectorXd::Zero(d);
        cur.a = Eigen::VectorXd::Zero(d);
        cur.s.assign(n_clusters, 0.0);
        cur.b.assign(n_clusters, 0.0);
        cur.alpha.assign(n_clusters, 0.0);
        cur.sigma_inv = Eigen::MatrixXd::Zero(d, d);
        cur.g_inv = Eigen::MatrixXd::Zero(d, d);

        for (int c = 0; c < n_clusters; ++c) {
            const auto& mem = members[c];
            for (int j : mem) {
                double rj = 0.0;
                for (int k : mem) rj += prev.sigma_inv(j, k);
                cur.r[j] = rj;
                cur.s[c] += rj;
            }
            double denom_sigma = 1.0 + var * cur.s[c];
            if (denom_sigma == 0.0)
                throw std::runtime_error("singular covariance update at level " +
                                         std::to_string(l));
            for (int j : mem)
                for (int k : mem)
                    cur.sigma_inv(j, k) =
                        prev.sigma_inv(j, k) - var * cur.r[j] * cur.r[k] / denom_sigma;

            cur.alpha[c] = var / denom_sigma;
            for (int j : mem) {
                double aj = 0.0;
                for (int k : mem) aj += cur.r[k] * prev.g_inv(j, k);
                cur.a[j] = aj;
                cur.b[c] += cur.r[j] * aj;
            }
            double denom_g = 1.0 - cur.alpha[c] * cur.b[c];
            if (denom_g == 0.0)
                throw std::runtime_error("singular Hessian update at level " + std::to_string(l));
            for (int j : mem)
                for (int k : mem)
                    cur.g_inv(j, k) =
                        prev.g_inv(j, k) + cur.alpha[c] * cur.a[j] * cur.a[k] / denom_g;
        }
        out.levels.push_back(std::move(cur));
    }
    return out;
}

}  // namespace hola
