#include "hola/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <vector>

#include "hola/laplace.hpp"

namespace hola {

namespace {

constexpr int kDefaultNodes1D = 50;
constexpr int kDefaultNodesTensor = 20;
constexpr int kMaxNodes1D = 400;
constexpr int kMaxNodesTensor = 30;
constexpr int kMaxTensorDim = 6;
constexpr double kReliableDiff = 1e-6;

struct Accum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double total() const { return sum + comp; }
};

int resolve_nodes(int requested, int fallback, int cap) {
    if (requested == 0) return fallback;
    if (requested < 10) throw OracleError("nodes_per_dim must be at least 10");
    if (requested > cap)
        throw OracleError("nodes_per_dim exceeds the cap of " + std::to_string(cap));
    return requested;
}

// log sum_{k<n} p_k(x)^2 for the orthonormal Hermite polynomials, with
// rescaling so extreme nodes never overflow.  The reciprocal is the
// quadrature weight (Christoffel function); the eigenvector route loses the
// tail weights entirely beyond ~40 nodes.
double log_hermite_norm_sum(int n, double x) {
    double log_scale = 0.0;
    double p_prev = 0.0;
    double p = std::pow(std::numbers::pi, -0.25);
    double sum = p * p;
    for (int k = 1; k < n; ++k) {
        double p_next = x * std::sqrt(2.0 / k) * p - std::sqrt((k - 1.0) / k) * p_prev;
        p_prev = p;
        p = p_next;
        sum += p * p;
        if (std::abs(p) > 1e100) {
            p *= 1e-100;
            p_prev *= 1e-100;
            sum *= 1e-200;
            log_scale += std::log(1e100);
        }
    }
    return std::log(sum) + 2.0 * log_scale;
}

Eigen::VectorXd gauss_hermite_nodes(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double off = std::sqrt(i / 2.0);
        jacobi(i, i - 1) = off;
        jacobi(i - 1, i) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) throw std::runtime_error("Hermite eigensolve failed");
    return es.eigenvalues();
}

// Nodes plus log(w_i exp(x_i^2)), the quantity the recentred rules need.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite_log(int n) {
    Eigen::VectorXd x = gauss_hermite_nodes(n);
    Eigen::VectorXd log_wx(n);
    for (int i = 0; i < n; ++i) log_wx[i] = x[i] * x[i] - log_hermite_norm_sum(n, x[i]);
    return {x, log_wx};
}

double log_integral_1d_at(const GFunction& g, int nodes, bool adaptive) {
    Eigen::VectorXd center(1);
    center[0] = 0.0;
    if (adaptive) center = minimize(g, center);
    double curvature = g.deriv_array(2, center).at({0, 0});
    if (!(curvature > 0.0)) throw OracleError("non-positive curvature at the quadrature center");
    double tau = 1.0 / std::sqrt(curvature);
    double g_center = g.value(center);

    auto [x, log_wx] = gauss_hermite_log(nodes);
    Accum acc;
    Eigen::VectorXd u(1);
    for (int q = 0; q < nodes; ++q) {
        u[0] = center[0] + std::numbers::sqrt2 * tau * x[q];
        acc.add(std::exp(log_wx[q] - (g.value(u) - g_center)));
    }
    return 0.5 * std::log(2.0) + std::log(tau) - g_center + std::log(acc.total());
}

double tensor_log_integral_at(const GFunction& g, int nodes, bool adaptive) {
    const int d = g.dim();
    Eigen::VectorXd center = Eigen::VectorXd::Zero(d);
    if (adaptive) center = minimize(g, center);
    Eigen::MatrixXd h = g.hessian(center);
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success)
        throw OracleError("Hessian not positive definite at the quadrature center");
    Eigen::MatrixXd l = llt.matrixL();
    double log_det_l = 0.0;
    for (int i = 0; i < d; ++i) log_det_l += std::log(l(i, i));

    // u = center + sqrt(2) L^-T x; precompute the columns so points build up
    // one axis at a time.
    Eigen::MatrixXd l_inv_t =
        l.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(d, d));
    std::vector<Eigen::VectorXd> axis_step(d);
    for (int r = 0; r < d; ++r) axis_step[r] = std::numbers::sqrt2 * l_inv_t.col(r);

    auto [x, log_w] = gauss_hermite_log(nodes);

    const double g_center = g.value(center);
    Accum acc;
    std::vector<Eigen::VectorXd> partial(d + 1, center);
    std::vector<double> log_w_partial(d + 1, 0.0);
    std::vector<int> idx(d, 0);
    int depth = 0;
    // Depth-first walk over the grid, reusing point prefixes.
    while (true) {
        while (depth < d) {
            partial[depth + 1] = partial[depth] + x[idx[depth]] * axis_step[depth];
            log_w_partial[depth + 1] = log_w_partial[depth] + log_w[idx[depth]];
            ++depth;
        }
        acc.add(std::exp(log_w_partial[d] - (g.value(partial[d]) - g_center)));
        int axis = d - 1;
        while (axis >= 0 && ++idx[axis] == nodes) {
            idx[axis] = 0;
            --axis;
        }
        if (axis < 0) break;
        depth = axis;  // recompute prefixes from the changed axis down
    }
    return 0.5 * d * std::log(2.0) - log_det_l - g_center + std::log(acc.total());
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("need at least one node");
    Eigen::VectorXd nodes = gauss_hermite_nodes(n);
    Eigen::VectorXd weights(n);
    for (int i = 0; i < n; ++i)
        weights[i] = std::exp(-log_hermite_norm_sum(n, nodes[i]));
    return {nodes, weights};
}

QuadResult log_integral_1d(const GFunction& g, const QuadratureSpec& spec) {
    if (g.dim() != 1) throw std::invalid_argument("objective must be one-dimensional");
    int nodes = resolve_nodes(spec.nodes_per_dim, kDefaultNodes1D, kMaxNodes1D);
    QuadResult r;
    r.value = log_integral_1d_at(g, nodes, spec.adaptive);
    r.nodes_used = nodes;
    if (spec.refine) {
        int refined = std::min(2 * nodes, kMaxNodes1D);
        double v2 = log_integral_1d_at(g, refined, spec.adaptive);
        r.refine_diff = std::abs(v2 - r.value);
        r.value = v2;
    }
    r.reliable = r.refine_diff <= kReliableDiff;
    return r;
}

QuadResult exact_loglik_factorized(const GlmmGFunction& g, const QuadratureSpec& spec) {
    if (!g.factorizable())
        throw OracleError(
            "model does not factorize into one-dimensional integrals; "
            "collapse it first or use the tensor oracle");
    QuadResult total;
    total.reliable = true;
    for (int j = 0; j < g.dim(); ++j) {
        auto obj = g.cluster_objective(j);
        QuadResult r = log_integral_1d(*obj, spec);
        total.value += r.value;
        total.refine_diff += r.refine_diff;
        total.nodes_used = r.nodes_used;
    }
    total.reliable = total.refine_diff <= kReliableDiff;
    return total;
}

QuadResult exact_loglik_tensor(const GFunction& g, const QuadratureSpec& spec) {
    if (g.dim() > kMaxTensorDim)
        throw OracleError("tensor-product oracle is capped at dimension " +
                          std::to_string(kMaxTensorDim));
    int nodes = resolve_nodes(spec.nodes_per_dim, kDefaultNodesTensor, kMaxNodesTensor);
    QuadResult r;
    r.value = tensor_log_integral_at(g, nodes, spec.adaptive);
    r.nodes_used = nodes;
    // Refinement is mandatory here: there is no factorized cross-check.
    int refined = std::min(2 * nodes, kMaxNodesTensor);
    if (refined > nodes) {
        double v2 = tensor_log_integral_at(g, refined, spec.adaptive);
        r.refine_diff = std::abs(v2 - r.value);
        r.value = v2;
    }
    r.reliable = r.refine_diff <= kReliableDiff;
    return r;
}

QuadResult exact_loglik_auto(const GlmmGFunction& g, const QuadratureSpec& spec) {
    if (g.factorizable()) return exact_loglik_factorized(g, spec);
    return exact_loglik_tensor(g, spec);
}

}  // namespace hola
