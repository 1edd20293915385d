#include "hola/laplace.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>

#include "hola/bipartition.hpp"

namespace hola {

Eigen::VectorXd minimize(const GFunction& g, Eigen::VectorXd u, const NewtonOptions& opts) {
    if (u.size() != g.dim()) throw std::invalid_argument("start point has wrong dimension");
    double f = g.value(u);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        Eigen::VectorXd grad = g.gradient(u);
        if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) return u;

        Eigen::MatrixXd h = g.hessian(u);
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() != Eigen::Success)
            throw NonConvexError("Hessian not positive definite at Newton iterate " +
                                 std::to_string(iter));
        Eigen::VectorXd step = llt.solve(-grad);

        double slope = grad.dot(step);  // < 0 for a descent direction
        double t = 1.0;
        // Step-halving with an absolute slack so steps near the flat bottom
        // are still accepted once decreases fall below double resolution.
        const double slack = 1e-14 * (1.0 + std::abs(f));
        while (true) {
            Eigen::VectorXd candidate = u + t * step;
            double fc = g.value(candidate);
            if (fc <= f + 1e-4 * t * slope + slack) {
                u = std::move(candidate);
                f = fc;
                break;
            }
            t *= 0.5;
            if (t < 1e-14)
                throw ConvergenceError("line search failed to make progress");
        }
    }
    Eigen::VectorXd grad = g.gradient(u);
    if (grad.lpNorm<Eigen::Infinity>() <= opts.grad_tol) return u;
    throw ConvergenceError("Newton iteration cap reached before gradient tolerance");
}

double LaplaceExpansion::log_integral(int k) const {
    if (k < 1) throw std::invalid_argument("order must be >= 1");
    double v = first_order;
    for (int l = 1; l < k; ++l) {
        auto it = level_terms.find(l);
        if (it == level_terms.end())
            throw std::logic_error("level term " + std::to_string(l) + " not computed");
        v += it->second;
    }
    return v;
}

LaplaceExpansion expand_order1(const GFunction& g, const Eigen::VectorXd& u0,
                               const NewtonOptions& opts) {
    LaplaceExpansion e;
    e.u_hat = minimize(g, u0, opts);
    e.g_min = g.value(e.u_hat);

    Eigen::MatrixXd h = g.hessian(e.u_hat);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
        throw NonConvexError("Hessian not positive definite at the minimum");
    double log_det = 0.0;
    const Eigen::MatrixXd l = llt.matrixL();
    for (int i = 0; i < l.rows(); ++i) log_det += 2.0 * std::log(l(i, i));
    e.log_det_hess = log_det;
    e.hess_inverse = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));

    e.first_order = -0.5 * log_det + 0.5 * g.dim() * std::log(2.0 * std::numbers::pi) - e.g_min;
    return e;
}

namespace {

double factorial_d(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double class_prefactor(const Bipartition& b) {
    double sign = (b.num_blocks() % 2 == 0) ? 1.0 : -1.0;
    return sign / factorial_d(b.ground_size());
}

// Derivative arrays of g at u_hat for each order that appears as a block
// size, computed once and shared across classes.
std::map<int, DerivArray> block_order_arrays(const GFunction& g, const LaplaceExpansion& base,
                                             int level) {
    const int max_order = 2 * level + 2;
    if (g.truncation_order() < max_order)
        throw std::invalid_argument("objective provides derivatives to order " +
                                    std::to_string(g.truncation_order()) +
                                    " but level " + std::to_string(level) + " needs " +
                                    std::to_string(max_order));
    std::map<int, DerivArray> arrays;
    for (int k = 3; k <= max_order; ++k)
        arrays.emplace(k, g.deriv_array(k, base.u_hat));
    return arrays;
}

double term_for(const Bipartition& b, const std::map<int, DerivArray>& arrays,
                const Eigen::MatrixXd& inv2) {
    std::vector<const DerivArray*> blocks;
    blocks.reserve(b.p_blocks.size());
    for (const auto& blk : b.p_blocks) blocks.push_back(&arrays.at(static_cast<int>(blk.size())));
    return class_prefactor(b) * contract_bipartition(b, blocks, inv2);
}

}  // namespace

double level_term(const GFunction& g, const LaplaceExpansion& base, int level) {
    auto arrays = block_order_arrays(g, base, level);
    double sum = 0.0;
    for (const auto& cls : level_catalog(level))
        sum += static_cast<double>(cls.multiplicity) *
               term_for(cls.representative, arrays, base.hess_inverse);
    return sum;
}

double level_term_exhaustive(const GFunction& g, const LaplaceExpansion& base, int level) {
    auto arrays = block_order_arrays(g, base, level);
    double sum = 0.0;
    for (const auto& b : enumerate_connected_exhaustive(level))
        sum += term_for(b, arrays, base.hess_inverse);
    return sum;
}

LaplaceExpansion expand(const GFunction& g, int order, const Eigen::VectorXd& u0,
                        const NewtonOptions& opts) {
    if (order < 1) throw std::invalid_argument("order must be >= 1");
    LaplaceExpansion e = expand_order1(g, u0, opts);
    for (int l = 1; l < order; ++l) e.level_terms[l] = level_term(g, e, l);
    return e;
}

double reparameterization_gap(const GFunction& g, const Eigen::MatrixXd& a, int order,
                              const Eigen::VectorXd& u0) {
    LaplaceExpansion original = expand(g, order, u0);
    ReparameterizedGFunction gv(g, a);
    LaplaceExpansion transformed = expand(gv, order, a * u0);
    return std::abs(original.log_integral(order) - transformed.log_integral(order));
}

}  // namespace hola
