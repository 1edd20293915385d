#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "hola/gfunction.hpp"

namespace hola_test {

/// g(u) = n (e^u - u): minimum at 0, all derivatives of order >= 2 equal
/// n e^u.  The integral has the closed form log Gamma(n) - n log n.
class ExpObjective final : public hola::GFunction {
public:
    explicit ExpObjective(double n) : n_(n) {}

    int dim() const override { return 1; }
    int truncation_order() const override { return 10; }

    double value(const Eigen::VectorXd& u) const override {
        return n_ * (std::exp(u[0]) - u[0]);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override {
        Eigen::VectorXd g(1);
        g[0] = n_ * (std::exp(u[0]) - 1.0);
        return g;
    }
    hola::DerivArray deriv_array(int order, const Eigen::VectorXd& u) const override {
        Eigen::VectorXd diag(1);
        diag[0] = n_ * std::exp(u[0]);
        return hola::DerivArray::diagonal(order, std::move(diag));
    }

private:
    double n_;
};

/// g(u) = sum_j n_j (e^(u_j) - u_j) + 0.5 u'Au: a separable non-Gaussian
/// part plus a quadratic coupling; derivative arrays above order 2 stay
/// diagonal.
class SumExpQuadratic final : public hola::GFunction {
public:
    SumExpQuadratic(Eigen::VectorXd n, Eigen::MatrixXd a) : n_(std::move(n)), a_(std::move(a)) {}

    int dim() const override { return static_cast<int>(n_.size()); }
    int truncation_order() const override { return 10; }

    double value(const Eigen::VectorXd& u) const override {
        double v = 0.5 * u.dot(a_ * u);
        for (int j = 0; j < n_.size(); ++j) v += n_[j] * (std::exp(u[j]) - u[j]);
        return v;
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override {
        Eigen::VectorXd g = a_ * u;
        for (int j = 0; j < n_.size(); ++j) g[j] += n_[j] * (std::exp(u[j]) - 1.0);
        return g;
    }
    hola::DerivArray deriv_array(int order, const Eigen::VectorXd& u) const override {
        Eigen::VectorXd diag(n_.size());
        for (int j = 0; j < n_.size(); ++j) diag[j] = n_[j] * std::exp(u[j]);
        if (order == 2) {
            Eigen::MatrixXd h = a_;
            h += diag.asDiagonal();
            return hola::DerivArray::dense(h);
        }
        return hola::DerivArray::diagonal(order, std::move(diag));
    }

private:
    Eigen::VectorXd n_;
    Eigen::MatrixXd a_;
};

/// Truncated moment expansion of the one-dimensional log-integral around a
/// Gaussian: an oracle for the level corrections that never touches the
/// bipartition machinery.
///
/// Attach a bookkeeping parameter t to each derivative, g_k -> g_k t^(k-2),
/// expand  log E[exp(-sum_k g_k t^(k-2) S^k / k!)]  with S ~ N(0, 1/g2) as a
/// power series in t; the t^2 coefficient is the level-1 correction and the
/// t^4 coefficient the level-2 correction.
struct MomentSeries {
    double level1 = 0.0;
    double level2 = 0.0;
};

inline MomentSeries moment_series_1d(double g2, double g3, double g4, double g5, double g6) {
    // poly[a][b]: coefficient of t^a S^b, truncated at t-degree 4
    constexpr int kMaxT = 4;
    constexpr int kMaxS = 28;
    using Poly = std::array<std::array<double, kMaxS + 1>, kMaxT + 1>;
    auto zero = [] {
        Poly p{};
        for (auto& row : p) row.fill(0.0);
        return p;
    };

    Poly x = zero();
    const double gs[] = {g3, g4, g5, g6};
    double kfact = 2.0;
    for (int k = 3; k <= 6; ++k) {
        kfact *= k;
        if (k - 2 <= kMaxT) x[k - 2][k] = -gs[k - 3] / kfact;
    }

    auto multiply = [&](const Poly& p, const Poly& q) {
        Poly r = zero();
        for (int a1 = 0; a1 <= kMaxT; ++a1)
            for (int b1 = 0; b1 <= kMaxS; ++b1) {
                if (p[a1][b1] == 0.0) continue;
                for (int a2 = 0; a2 + a1 <= kMaxT; ++a2)
                    for (int b2 = 0; b2 + b1 <= kMaxS; ++b2) {
                        if (q[a2][b2] == 0.0) continue;
                        r[a1 + a2][b1 + b2] += p[a1][b1] * q[a2][b2];
                    }
            }
        return r;
    };

    // exp(x) = 1 + x + x^2/2 + x^3/6 + x^4/24, enough for t-degree 4
    Poly expx = zero();
    expx[0][0] = 1.0;
    Poly power = zero();
    power[0][0] = 1.0;
    double fact = 1.0;
    for (int n = 1; n <= 4; ++n) {
        power = multiply(power, x);
        fact *= n;
        for (int a = 0; a <= kMaxT; ++a)
            for (int b = 0; b <= kMaxS; ++b) expx[a][b] += power[a][b] / fact;
    }

    // E[S^b] = (b-1)!! s^(b/2) for even b, 0 for odd
    const double s = 1.0 / g2;
    std::array<double, kMaxT + 1> z{};
    for (int a = 0; a <= kMaxT; ++a) {
        double total = 0.0;
        for (int b = 0; b <= kMaxS; b += 2) {
            if (expx[a][b] == 0.0) continue;
            double dblfact = 1.0;
            for (int i = b - 1; i >= 1; i -= 2) dblfact *= i;
            total += expx[a][b] * dblfact * std::pow(s, b / 2);
        }
        z[a] = total;
    }

    // log(z0 + z2 t^2 + z4 t^4) with z0 = 1
    MomentSeries out;
    out.level1 = z[2];
    out.level2 = z[4] - 0.5 * z[2] * z[2];
    return out;
}

/// Central finite-difference check of gradient against value.
inline double max_gradient_fd_error(const hola::GFunction& g, const Eigen::VectorXd& u,
                                    double step = 1e-5) {
    double worst = 0.0;
    Eigen::VectorXd grad = g.gradient(u);
    for (int j = 0; j < g.dim(); ++j) {
        Eigen::VectorXd up = u, dn = u;
        up[j] += step;
        dn[j] -= step;
        double fd = (g.value(up) - g.value(dn)) / (2.0 * step);
        double scale = std::max(1.0, std::abs(fd));
        worst = std::max(worst, std::abs(fd - grad[j]) / scale);
    }
    return worst;
}

/// Central finite-difference check of the order-k array against order k-1.
inline double max_deriv_fd_error(const hola::GFunction& g, int order, const Eigen::VectorXd& u,
                                 double step = 1e-5) {
    double worst = 0.0;
    const int d = g.dim();
    hola::DerivArray high = g.deriv_array(order, u);
    std::vector<int> idx(order, 0);
    while (true) {
        Eigen::VectorXd up = u, dn = u;
        up[idx[order - 1]] += step;
        dn[idx[order - 1]] -= step;
        std::vector<int> low_idx(idx.begin(), idx.end() - 1);
        double fd;
        if (order == 2) {
            fd = (g.gradient(up)[idx[0]] - g.gradient(dn)[idx[0]]) / (2.0 * step);
        } else {
            fd = (g.deriv_array(order - 1, up).at(low_idx) -
                  g.deriv_array(order - 1, dn).at(low_idx)) /
                 (2.0 * step);
        }
        double got = high.at(idx);
        double scale = std::max(1.0, std::abs(fd));
        worst = std::max(worst, std::abs(fd - got) / scale);
        int pos = order - 1;
        while (pos >= 0 && ++idx[pos] == d) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return worst;
}

/// Random symmetric positive definite matrix with moderate conditioning.
/// Explicitly symmetrized: a + a' commutes entrywise, so reads match exactly.
inline Eigen::MatrixXd random_spd(int d, std::mt19937& rng, double ridge = 1.0) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return unif(rng); });
    Eigen::MatrixXd s = m * m.transpose() + ridge * Eigen::MatrixXd::Identity(d, d);
    return 0.5 * (s + s.transpose()).eval();
}

/// Random well-conditioned invertible matrix: random rotation times a
/// diagonal with entries in [0.5, 2].
inline Eigen::MatrixXd random_well_conditioned(int d, std::mt19937& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return normal(rng); });
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd q = qr.householderQ();
    std::uniform_real_distribution<double> scale(0.5, 2.0);
    Eigen::VectorXd diag = Eigen::VectorXd::NullaryExpr(d, [&](int) { return scale(rng); });
    return q * diag.asDiagonal();
}

}  // namespace hola_test
