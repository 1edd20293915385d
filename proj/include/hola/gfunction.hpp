#pragma once

#include <Eigen/Dense>

#include "hola/tensor.hpp"

namespace hola {

/// A smooth objective g on R^d with derivative arrays up to a truncation
/// order K: the exponent of the integral  L = integral of exp(-g(u)) du.
class GFunction {
public:
    virtual ~GFunction() = default;

    virtual int dim() const = 0;
    virtual int truncation_order() const = 0;  // highest derivative order provided

    virtual double value(const Eigen::VectorXd& u) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& u) const = 0;

    /// k-th derivative array at u, 2 <= k <= truncation_order().
    virtual DerivArray deriv_array(int order, const Eigen::VectorXd& u) const = 0;

    /// Dense Hessian at u.
    Eigen::MatrixXd hessian(const Eigen::VectorXd& u) const;
};

/// Quadratic objective 0.5 u'Au + b'u + c with A symmetric positive definite.
class QuadraticGFunction : public GFunction {
public:
    QuadraticGFunction(Eigen::MatrixXd a, Eigen::VectorXd b, double c);

    int dim() const override { return static_cast<int>(a_.rows()); }
    int truncation_order() const override { return 8; }
    double value(const Eigen::VectorXd& u) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override;
    DerivArray deriv_array(int order, const Eigen::VectorXd& u) const override;

private:
    Eigen::MatrixXd a_;
    Eigen::VectorXd b_;
    double c_;
};

/// One-dimensional polynomial  g(u) = sum_k g_k u^k / k!  given by its
/// derivative values at zero; handy for prescribing an exact derivative jet.
class Polynomial1D : public GFunction {
public:
    /// derivs_at_zero[k] = g^(k)(0), starting at k = 0.
    explicit Polynomial1D(std::vector<double> derivs_at_zero);

    int dim() const override { return 1; }
    int truncation_order() const override { return static_cast<int>(derivs_.size()) - 1; }
    double value(const Eigen::VectorXd& u) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override;
    DerivArray deriv_array(int order, const Eigen::VectorXd& u) const override;

private:
    std::vector<double> derivs_;
};

/// The objective after the linear change of variables v = A u:
///   g_v(v) = g(A^-1 v) + log |det A|,
/// which leaves the integral unchanged.  Derivative arrays transform by the
/// multilinear action of A^-1.
class ReparameterizedGFunction : public GFunction {
public:
    ReparameterizedGFunction(const GFunction& inner, Eigen::MatrixXd a);

    int dim() const override { return inner_.dim(); }
    int truncation_order() const override { return inner_.truncation_order(); }
    double value(const Eigen::VectorXd& v) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& v) const override;
    DerivArray deriv_array(int order, const Eigen::VectorXd& v) const override;

    const Eigen::MatrixXd& transform() const { return a_; }

private:
    const GFunction& inner_;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd a_inv_;
    double log_abs_det_a_;
};

}  // namespace hola
