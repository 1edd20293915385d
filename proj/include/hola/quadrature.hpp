#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <utility>

#include "hola/glmm.hpp"

namespace hola {

class OracleError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
    int nodes_per_dim = 0;  // 0 = default: 50 for 1-D integrals, 20 for tensor grids
    bool adaptive = true;   // center at the mode, scale by the curvature
    bool refine = true;     // re-run at doubled nodes and report the difference
};

struct QuadResult {
    double value = 0.0;
    double refine_diff = 0.0;
    bool reliable = true;  // refine_diff within 1e-6
    int nodes_used = 0;
};

/// Gauss-Hermite nodes and weights for weight function exp(-x^2).
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite(int n);

/// log integral exp(-g(u)) du for a one-dimensional objective, by
/// Gauss-Hermite quadrature recentred at the minimum of g and rescaled by
/// its curvature there.
QuadResult log_integral_1d(const GFunction& g, const QuadratureSpec& spec = {});

/// Exact log-likelihood of a factorizable model (indicator Z, diagonal
/// Sigma): the sum of per-effect one-dimensional log-integrals.
QuadResult exact_loglik_factorized(const GlmmGFunction& g, const QuadratureSpec& spec = {});

/// Exact log-likelihood by a full tensor-product grid over all d effects;
/// d <= 6 and nodes_per_dim <= 30.  The refinement check is always run.
QuadResult exact_loglik_tensor(const GFunction& g, const QuadratureSpec& spec = {});

/// Factorized oracle when the model allows it, tensor grid otherwise.
QuadResult exact_loglik_auto(const GlmmGFunction& g, const QuadratureSpec& spec = {});

}  // namespace hola
