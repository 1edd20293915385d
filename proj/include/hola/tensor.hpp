#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "hola/bipartition.hpp"

namespace hola {

/// One rank-1 term w * z (x) z (x) ... (x) z of a scaled-outer-sum array.
struct OuterTerm {
    double weight = 0.0;
    Eigen::VectorXd factor;
};

/// Symmetric order-k derivative array over indices {1..d}^k.
///
/// Three storage forms cover the objectives we build:
///   Dense     - all d^k entries (must be symmetric),
///   Diagonal  - d entries, value at (j, ..., j), zero elsewhere,
///   OuterSum  - sum of scaled symmetric outer powers, sum_t w_t z_t^(x)k.
class DerivArray {
public:
    enum class Storage { Dense, Diagonal, OuterSum };

    static DerivArray dense(int order, int dim, std::vector<double> values);
    static DerivArray dense(const Eigen::MatrixXd& symmetric);  // order 2
    static DerivArray diagonal(int order, Eigen::VectorXd diag);
    static DerivArray outer_sum(int order, int dim, std::vector<OuterTerm> terms);

    int order() const { return order_; }
    int dim() const { return dim_; }
    Storage storage() const { return storage_; }

    /// Entry at an index tuple (idx.size() == order, 0-based).
    double at(const std::vector<int>& idx) const;

    const std::vector<double>& dense_values() const;
    const Eigen::VectorXd& diagonal_values() const;
    const std::vector<OuterTerm>& outer_terms() const;

    /// Dense copy of this array; throws when d^order exceeds the dense cap.
    DerivArray to_dense() const;

    /// Entrywise scale by prod_i n(j_i)^(-1/order); see normalize_deriv.
    DerivArray scaled_by_index_weights(const Eigen::VectorXd& per_index_scale) const;

private:
    int order_ = 0;
    int dim_ = 0;
    Storage storage_ = Storage::Dense;
    std::vector<double> values_;     // Dense
    Eigen::VectorXd diag_;           // Diagonal
    std::vector<OuterTerm> terms_;   // OuterSum
};

/// Absolute row sums per axis and index, plus the overall maximum: the
/// finite-sample norm behind the boundedness condition on normalized
/// derivative arrays.
struct RowSumNorms {
    std::vector<std::vector<double>> per_axis;  // [axis][index]
    double max_norm = 0.0;
};

RowSumNorms row_sum_norms(const DerivArray& a);

/// Same computation on a raw dense array (row-major, dim^order entries);
/// the array need not be symmetric.
RowSumNorms row_sum_norms_dense(const double* values, int order, int dim);

/// Average each entry over the permutations of its index tuple, in place,
/// so permuted reads return identical values afterwards.
void symmetrize_dense(std::vector<double>& values, int order, int dim);

/// Normalized derivative array f with f_(j1..jk) = g_(j1..jk) *
/// prod_i n(j_i)^(-1/k).  Requires n > 0 entrywise.
DerivArray normalize_deriv(const DerivArray& g, const Eigen::VectorXd& normalizers);

/// Normalized inverse Hessian: f^(jk) = n_j^(1/2) n_k^(1/2) g^(jk).
Eigen::MatrixXd normalize_inverse2(const Eigen::MatrixXd& hess_inverse,
                                   const Eigen::VectorXd& normalizers);

/// Index sum  sum_j prod_p A_p[j_p] prod_(s,t) inv2(j_s, j_t)  over
/// j in {1..d}^(2m), without the (-1)^v/(2m)! prefactor.  block_arrays[i]
/// is the order-|p_i| array attached to pq.p_blocks[i].
///
/// Dispatches between a collapsed loop when every block is diagonal, a
/// rank-1 streaming loop when every block is diagonal or outer-sum, and the
/// dense reference loop otherwise.
double contract_bipartition(const Bipartition& pq,
                            const std::vector<const DerivArray*>& block_arrays,
                            const Eigen::MatrixXd& inverse2);

/// Reference implementation: the naive nested loop over all d^(2m) index
/// tuples.  Capped at 1e8 tuples.
double contract_bipartition_dense(const Bipartition& pq,
                                  const std::vector<const DerivArray*>& block_arrays,
                                  const Eigen::MatrixXd& inverse2);

}  // namespace hola
