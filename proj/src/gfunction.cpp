#include "hola/gfunction.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace hola {

Eigen::MatrixXd GFunction::hessian(const Eigen::VectorXd& u) const {
    DerivArray h = deriv_array(2, u).to_dense();
    const int d = dim();
    Eigen::MatrixXd m(d, d);
    const auto& vals = h.dense_values();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = vals[static_cast<std::size_t>(i) * d + j];
    return m;
}

QuadraticGFunction::QuadraticGFunction(Eigen::MatrixXd a, Eigen::VectorXd b, double c)
    : a_(std::move(a)), b_(std::move(b)), c_(c) {
    if (a_.rows() != a_.cols() || a_.rows() != b_.size())
        throw std::invalid_argument("quadratic term dimensions disagree");
    a_ = 0.5 * (a_ + a_.transpose()).eval();
}

double QuadraticGFunction::value(const Eigen::VectorXd& u) const {
    return 0.5 * u.dot(a_ * u) + b_.dot(u) + c_;
}

Eigen::VectorXd QuadraticGFunction::gradient(const Eigen::VectorXd& u) const {
    return a_ * u + b_;
}

DerivArray QuadraticGFunction::deriv_array(int order, const Eigen::VectorXd&) const {
    if (order == 2) return DerivArray::dense(a_);
    // All higher derivatives vanish.
    return DerivArray::diagonal(order, Eigen::VectorXd::Zero(dim()));
}

Polynomial1D::Polynomial1D(std::vector<double> derivs_at_zero)
    : derivs_(std::move(derivs_at_zero)) {
    if (derivs_.size() < 3)
        throw std::invalid_argument("need derivative values up to order 2 at least");
}

double Polynomial1D::value(const Eigen::VectorXd& u) const {
    double x = u[0], term = 1.0, sum = 0.0;
    for (std::size_t k = 0; k < derivs_.size(); ++k) {
        sum += derivs_[k] * term;
        term *= x / static_cast<double>(k + 1);
    }
    return sum;
}

Eigen::VectorXd Polynomial1D::gradient(const Eigen::VectorXd& u) const {
    double x = u[0], term = 1.0, sum = 0.0;
    for (std::size_t k = 1; k < derivs_.size(); ++k) {
        sum += derivs_[k] * term;
        term *= x / static_cast<double>(k);
    }
    Eigen::VectorXd g(1);
    g[0] = sum;
    return g;
}

DerivArray Polynomial1D::deriv_array(int order, const Eigen::VectorXd& u) const {
    if (order < 2 || order > truncation_order())
        throw std::invalid_argument("derivative order outside truncation");
    double x = u[0], term = 1.0, sum = 0.0;
    for (std::size_t k = order; k < derivs_.size(); ++k) {
        sum += derivs_[k] * term;
        term *= x / static_cast<double>(k - order + 1);
    }
    Eigen::VectorXd diag(1);
    diag[0] = sum;
    return DerivArray::diagonal(order, std::move(diag));
}

ReparameterizedGFunction::ReparameterizedGFunction(const GFunction& inner, Eigen::MatrixXd a)
    : inner_(inner), a_(std::move(a)) {
    if (a_.rows() != a_.cols() || a_.rows() != inner_.dim())
        throw std::invalid_argument("transform must be square of the objective's dimension");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a_);
    double log_abs_det = 0.0;
    const auto& lu_matrix = lu.matrixLU();
    for (int i = 0; i < a_.rows(); ++i) {
        double piv = lu_matrix(i, i);
        if (piv == 0.0 || !std::isfinite(piv))
            throw std::invalid_argument("transform matrix is singular");
        log_abs_det += std::log(std::abs(piv));
    }
    log_abs_det_a_ = log_abs_det;
    a_inv_ = lu.inverse();
}

double ReparameterizedGFunction::value(const Eigen::VectorXd& v) const {
    return inner_.value(a_inv_ * v) + log_abs_det_a_;
}

Eigen::VectorXd ReparameterizedGFunction::gradient(const Eigen::VectorXd& v) const {
    return a_inv_.transpose() * inner_.gradient(a_inv_ * v);
}

namespace {

// Contract mode `mode` of a dense order-k array with matrix B:
// out[..., i, ...] = sum_j in[..., j, ...] B(j, i).
std::vector<double> contract_mode(const std::vector<double>& in, int order, int dim,
                                  int mode, const Eigen::MatrixXd& b) {
    std::vector<double> out(in.size(), 0.0);
    std::size_t inner = 1;
    for (int r = mode + 1; r < order; ++r) inner *= static_cast<std::size_t>(dim);
    std::size_t outer = in.size() / (inner * static_cast<std::size_t>(dim));
    for (std::size_t o = 0; o < outer; ++o) {
        for (int j = 0; j < dim; ++j) {
            std::size_t in_base = (o * dim + static_cast<std::size_t>(j)) * inner;
            for (int i = 0; i < dim; ++i) {
                double w = b(j, i);
                if (w == 0.0) continue;
                std::size_t out_base = (o * dim + static_cast<std::size_t>(i)) * inner;
                for (std::size_t r = 0; r < inner; ++r) out[out_base + r] += w * in[in_base + r];
            }
        }
    }
    return out;
}

}  // namespace

DerivArray ReparameterizedGFunction::deriv_array(int order, const Eigen::VectorXd& v) const {
    DerivArray inner = inner_.deriv_array(order, a_inv_ * v);
    const int d = dim();
    switch (inner.storage()) {
        case DerivArray::Storage::OuterSum: {
            std::vector<OuterTerm> terms = inner.outer_terms();
            for (auto& t : terms) t.factor = a_inv_.transpose() * t.factor;
            return DerivArray::outer_sum(order, d, std::move(terms));
        }
        case DerivArray::Storage::Diagonal: {
            // A diagonal array is a sum of d scaled unit outer powers; each
            // unit vector e_j maps to row j of A^-1.
            std::vector<OuterTerm> terms;
            const auto& diag = inner.diagonal_values();
            for (int j = 0; j < d; ++j) {
                if (diag[j] == 0.0) continue;
                OuterTerm t;
                t.weight = diag[j];
                t.factor = a_inv_.row(j).transpose();
                terms.push_back(std::move(t));
            }
            return DerivArray::outer_sum(order, d, std::move(terms));
        }
        case DerivArray::Storage::Dense: {
            std::vector<double> vals = inner.dense_values();
            for (int mode = 0; mode < order; ++mode)
                vals = contract_mode(vals, order, d, mode, a_inv_);
            // restore exact symmetry lost to round-off in the contractions
            symmetrize_dense(vals, order, d);
            return DerivArray::dense(order, d, std::move(vals));
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace hola
