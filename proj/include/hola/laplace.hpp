#pragma once

#include <Eigen/Dense>

#include <map>
#include <stdexcept>

#include "hola/gfunction.hpp"

namespace hola {

struct NewtonOptions {
    double grad_tol = 1e-10;  // max-norm of the gradient at the solution
    int max_iter = 100;
};

/// Raised when the Hessian stops being positive definite along the Newton
/// path: the objective violates the smooth-unique-minimum assumption.
class NonConvexError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Newton's method with step-halving line search.
Eigen::VectorXd minimize(const GFunction& g, Eigen::VectorXd u0,
                         const NewtonOptions& opts = {});

/// The pieces of the series approximation to log integral exp(-g):
/// the first-order value, the level corrections, and their partial sums.
struct LaplaceExpansion {
    Eigen::VectorXd u_hat;
    double g_min = 0.0;            // g(u_hat)
    double log_det_hess = 0.0;     // log det g''(u_hat)
    Eigen::MatrixXd hess_inverse;  // g''(u_hat)^-1
    double first_order = 0.0;      // -1/2 log det g'' + d/2 log 2pi - g(u_hat)
    std::map<int, double> level_terms;

    /// Order-k approximation: first_order plus the level terms below k.
    /// Throws if a required level term has not been computed.
    double log_integral(int k) const;
};

/// Minimize and assemble the first-order approximation (no level terms).
LaplaceExpansion expand_order1(const GFunction& g, const Eigen::VectorXd& u0,
                               const NewtonOptions& opts = {});

/// Level-l correction from the connected-bipartition catalog, evaluated on
/// the derivative arrays of g at base.u_hat.  Needs derivatives up to order
/// 2l + 2.
double level_term(const GFunction& g, const LaplaceExpansion& base, int level);

/// Same value summed over every member of each class individually rather
/// than multiplicity times one representative.  Exhaustive enumeration, so
/// restricted to levels whose ground sets stay within 2m <= 8.
double level_term_exhaustive(const GFunction& g, const LaplaceExpansion& base, int level);

/// Full order-k expansion: fills level_terms for levels 1 .. k-1.
LaplaceExpansion expand(const GFunction& g, int order, const Eigen::VectorXd& u0,
                        const NewtonOptions& opts = {});

/// |l~_k(g) - l~_k(g_v)| for the reparameterization v = A u.  Well below
/// 1e-8 relative for well-conditioned A.
double reparameterization_gap(const GFunction& g, const Eigen::MatrixXd& a, int order,
                              const Eigen::VectorXd& u0);

}  // namespace hola
