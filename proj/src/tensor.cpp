#include "hola/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hola {

namespace {

constexpr double kDenseTupleCap = 1e8;
constexpr double kStreamTermCap = 2e7;
constexpr std::int64_t kSymmetryCheckCap = 1 << 20;

std::int64_t checked_dense_size(int order, int dim) {
    double size = std::pow(static_cast<double>(dim), order);
    if (size > kDenseTupleCap)
        throw std::invalid_argument("dense array of dim " + std::to_string(dim) +
                                    " order " + std::to_string(order) +
                                    " exceeds the dense size cap");
    return static_cast<std::int64_t>(std::llround(size));
}

// Accumulator with compensated (Neumaier) summation; contraction results are
// compared at 1e-12 relative, so plain accumulation over 1e8 terms is not
// enough.
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

bool advance_odometer(std::vector<int>& idx, int base) {
    for (int pos = static_cast<int>(idx.size()) - 1; pos >= 0; --pos) {
        if (++idx[pos] < base) return true;
        idx[pos] = 0;
    }
    return false;
}

void check_contract_args(const Bipartition& pq,
                         const std::vector<const DerivArray*>& block_arrays,
                         const Eigen::MatrixXd& inverse2) {
    if (block_arrays.size() != pq.p_blocks.size())
        throw std::invalid_argument("one array per P-block required");
    const int d = static_cast<int>(inverse2.rows());
    if (inverse2.cols() != d) throw std::invalid_argument("inverse2 must be square");
    for (std::size_t i = 0; i < block_arrays.size(); ++i) {
        const DerivArray* a = block_arrays[i];
        if (!a) throw std::invalid_argument("null block array");
        if (a->order() != static_cast<int>(pq.p_blocks[i].size()))
            throw std::invalid_argument("block array order does not match block size");
        if (a->dim() != d)
            throw std::invalid_argument("block array dim does not match inverse2");
    }
}

}  // namespace

DerivArray DerivArray::dense(int order, int dim, std::vector<double> values) {
    if (order < 1 || dim < 1) throw std::invalid_argument("order and dim must be >= 1");
    std::int64_t size = checked_dense_size(order, dim);
    if (static_cast<std::int64_t>(values.size()) != size)
        throw std::invalid_argument("dense value count does not match dim^order");
    DerivArray a;
    a.order_ = order;
    a.dim_ = dim;
    a.storage_ = Storage::Dense;
    a.values_ = std::move(values);
    // Symmetry is part of the contract; verify while the array is small.
    if (size <= kSymmetryCheckCap && order > 1) {
        std::vector<int> idx(order, 0);
        do {
            std::vector<int> sorted = idx;
            std::sort(sorted.begin(), sorted.end());
            if (a.at(idx) != a.at(sorted))
                throw std::invalid_argument("dense derivative array is not symmetric");
        } while (advance_odometer(idx, dim));
    }
    return a;
}

DerivArray DerivArray::dense(const Eigen::MatrixXd& symmetric) {
    const int d = static_cast<int>(symmetric.rows());
    std::vector<double> vals(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) vals[static_cast<std::size_t>(i) * d + j] = symmetric(i, j);
    return dense(2, d, std::move(vals));
}

DerivArray DerivArray::diagonal(int order, Eigen::VectorXd diag) {
    if (order < 1 || diag.size() < 1)
        throw std::invalid_argument("order and dim must be >= 1");
    DerivArray a;
    a.order_ = order;
    a.dim_ = static_cast<int>(diag.size());
    a.storage_ = Storage::Diagonal;
    a.diag_ = std::move(diag);
    return a;
}

DerivArray DerivArray::outer_sum(int order, int dim, std::vector<OuterTerm> terms) {
    if (order < 1 || dim < 1) throw std::invalid_argument("order and dim must be >= 1");
    for (const auto& t : terms)
        if (t.factor.size() != dim)
            throw std::invalid_argument("outer-sum factor has wrong dimension");
    DerivArray a;
    a.order_ = order;
    a.dim_ = dim;
    a.storage_ = Storage::OuterSum;
    a.terms_ = std::move(terms);
    return a;
}

double DerivArray::at(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("index tuple length does not match order");
    switch (storage_) {
        case Storage::Dense: {
            std::size_t offset = 0;
            for (int i : idx) {
                if (i < 0 || i >= dim_) throw std::out_of_range("index out of range");
                offset = offset * dim_ + static_cast<std::size_t>(i);
            }
            return values_[offset];
        }
        case Storage::Diagonal: {
            for (int i : idx)
                if (i != idx[0]) return 0.0;
            return diag_[idx[0]];
        }
        case Storage::OuterSum: {
            std::vector<int> sorted = idx;
            std::sort(sorted.begin(), sorted.end());
            double v = 0.0;
            for (const auto& t : terms_) {
                double prod = t.weight;
                for (int i : sorted) prod *= t.factor[i];
                v += prod;
            }
            return v;
        }
    }
    return 0.0;
}

const std::vector<double>& DerivArray::dense_values() const {
    if (storage_ != Storage::Dense) throw std::logic_error("not a dense array");
    return values_;
}

const Eigen::VectorXd& DerivArray::diagonal_values() const {
    if (storage_ != Storage::Diagonal) throw std::logic_error("not a diagonal array");
    return diag_;
}

const std::vector<OuterTerm>& DerivArray::outer_terms() const {
    if (storage_ != Storage::OuterSum) throw std::logic_error("not an outer-sum array");
    return terms_;
}

DerivArray DerivArray::to_dense() const {
    if (storage_ == Storage::Dense) return *this;
    std::int64_t size = checked_dense_size(order_, dim_);
    std::vector<double> vals(static_cast<std::size_t>(size), 0.0);
    if (storage_ == Storage::Diagonal) {
        for (int j = 0; j < dim_; ++j) {
            std::size_t offset = 0;
            for (int r = 0; r < order_; ++r) offset = offset * dim_ + j;
            vals[offset] = diag_[j];
        }
    } else {
        std::vector<int> idx(order_, 0);
        std::size_t flat = 0;
        do {
            // factor products run in sorted index order: permuted tuples
            // then agree exactly, keeping the dense copy symmetric
            std::vector<int> sorted = idx;
            std::sort(sorted.begin(), sorted.end());
            double v = 0.0;
            for (const auto& t : terms_) {
                double prod = t.weight;
                for (int i : sorted) prod *= t.factor[i];
                v += prod;
            }
            vals[flat++] = v;
        } while (advance_odometer(idx, dim_));
    }
    DerivArray a;
    a.order_ = order_;
    a.dim_ = dim_;
    a.storage_ = Storage::Dense;
    a.values_ = std::move(vals);
    return a;
}

DerivArray DerivArray::scaled_by_index_weights(const Eigen::VectorXd& per_index_scale) const {
    if (per_index_scale.size() != dim_)
        throw std::invalid_argument("scale vector has wrong dimension");
    switch (storage_) {
        case Storage::Diagonal: {
            Eigen::VectorXd diag = diag_;
            for (int j = 0; j < dim_; ++j) {
                double s = std::pow(per_index_scale[j], order_);
                diag[j] *= s;
            }
            return DerivArray::diagonal(order_, std::move(diag));
        }
        case Storage::OuterSum: {
            std::vector<OuterTerm> terms = terms_;
            for (auto& t : terms) t.factor = t.factor.cwiseProduct(per_index_scale);
            return DerivArray::outer_sum(order_, dim_, std::move(terms));
        }
        case Storage::Dense: {
            std::vector<double> vals = values_;
            std::vector<int> idx(order_, 0);
            std::size_t flat = 0;
            do {
                // multiply in sorted index order so permuted tuples get the
                // bit-identical scale and the array stays exactly symmetric
                std::vector<int> sorted = idx;
                std::sort(sorted.begin(), sorted.end());
                double s = 1.0;
                for (int i : sorted) s *= per_index_scale[i];
                vals[flat++] *= s;
            } while (advance_odometer(idx, dim_));
            return DerivArray::dense(order_, dim_, std::move(vals));
        }
    }
    throw std::logic_error("unreachable");
}

void symmetrize_dense(std::vector<double>& values, int order, int dim) {
    if (order < 2) return;
    // Average within sorted-tuple equivalence classes: first accumulate per
    // canonical tuple, then write the mean back to every member.
    std::vector<double> sums(values.size(), 0.0);
    std::vector<double> counts(values.size(), 0.0);
    std::vector<int> idx(order, 0);
    std::size_t flat = 0;
    do {
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        std::size_t canon = 0;
        for (int i : sorted) canon = canon * dim + static_cast<std::size_t>(i);
        sums[canon] += values[flat];
        counts[canon] += 1.0;
        ++flat;
    } while (advance_odometer(idx, dim));
    std::fill(idx.begin(), idx.end(), 0);
    flat = 0;
    do {
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        std::size_t canon = 0;
        for (int i : sorted) canon = canon * dim + static_cast<std::size_t>(i);
        values[flat] = sums[canon] / counts[canon];
        ++flat;
    } while (advance_odometer(idx, dim));
}

RowSumNorms row_sum_norms_dense(const double* values, int order, int dim) {
    RowSumNorms r;
    r.per_axis.assign(order, std::vector<double>(dim, 0.0));
    std::vector<int> idx(order, 0);
    std::size_t flat = 0;
    do {
        double a = std::abs(values[flat++]);
        for (int axis = 0; axis < order; ++axis) r.per_axis[axis][idx[axis]] += a;
    } while (advance_odometer(idx, dim));
    r.max_norm = 0.0;
    for (const auto& axis : r.per_axis)
        for (double v : axis) r.max_norm = std::max(r.max_norm, v);
    return r;
}

RowSumNorms row_sum_norms(const DerivArray& a) {
    if (a.storage() == DerivArray::Storage::Diagonal) {
        RowSumNorms r;
        std::vector<double> row(a.dim());
        for (int j = 0; j < a.dim(); ++j) row[j] = std::abs(a.diagonal_values()[j]);
        r.per_axis.assign(a.order(), row);
        r.max_norm = row.empty() ? 0.0 : *std::max_element(row.begin(), row.end());
        return r;
    }
    if (a.storage() == DerivArray::Storage::OuterSum) {
        // Row sums need entry magnitudes of the materialized array; iterate
        // tuples without storing it.
        checked_dense_size(a.order(), a.dim());
        RowSumNorms r;
        r.per_axis.assign(a.order(), std::vector<double>(a.dim(), 0.0));
        std::vector<int> idx(a.order(), 0);
        do {
            std::vector<int> sorted = idx;
            std::sort(sorted.begin(), sorted.end());
            double v = 0.0;
            for (const auto& t : a.outer_terms()) {
                double prod = t.weight;
                for (int i : sorted) prod *= t.factor[i];
                v += prod;
            }
            v = std::abs(v);
            for (int axis = 0; axis < a.order(); ++axis) r.per_axis[axis][idx[axis]] += v;
        } while (advance_odometer(idx, a.dim()));
        r.max_norm = 0.0;
        for (const auto& axis : r.per_axis)
            for (double v : axis) r.max_norm = std::max(r.max_norm, v);
        return r;
    }
    return row_sum_norms_dense(a.dense_values().data(), a.order(), a.dim());
}

DerivArray normalize_deriv(const DerivArray& g, const Eigen::VectorXd& normalizers) {
    if (normalizers.size() != g.dim())
        throw std::invalid_argument("normalizer length does not match dim");
    for (int j = 0; j < normalizers.size(); ++j)
        if (!(normalizers[j] > 0.0))
            throw std::invalid_argument("normalizers must be positive");
    Eigen::VectorXd scale(g.dim());
    for (int j = 0; j < g.dim(); ++j)
        scale[j] = std::pow(normalizers[j], -1.0 / g.order());
    return g.scaled_by_index_weights(scale);
}

Eigen::MatrixXd normalize_inverse2(const Eigen::MatrixXd& hess_inverse,
                                   const Eigen::VectorXd& normalizers) {
    if (normalizers.size() != hess_inverse.rows())
        throw std::invalid_argument("normalizer length does not match dim");
    for (int j = 0; j < normalizers.size(); ++j)
        if (!(normalizers[j] > 0.0))
            throw std::invalid_argument("normalizers must be positive");
    Eigen::VectorXd root = normalizers.cwiseSqrt();
    return root.asDiagonal() * hess_inverse * root.asDiagonal();
}

double contract_bipartition_dense(const Bipartition& pq,
                                  const std::vector<const DerivArray*>& block_arrays,
                                  const Eigen::MatrixXd& inverse2) {
    check_contract_args(pq, block_arrays, inverse2);
    const int d = static_cast<int>(inverse2.rows());
    const int ground = pq.ground_size();
    if (std::pow(static_cast<double>(d), ground) > kDenseTupleCap)
        throw std::invalid_argument("dense contraction over d^(2m) tuples exceeds the cap");

    std::vector<DerivArray> densified;
    densified.reserve(block_arrays.size());
    for (const DerivArray* a : block_arrays) densified.push_back(a->to_dense());

    // Flat offsets: strides per ground element for each block's value array.
    struct BlockRef {
        const double* values;
        std::vector<std::pair<int, std::size_t>> elem_stride;  // (ground element, stride)
    };
    std::vector<BlockRef> refs;
    for (std::size_t p = 0; p < densified.size(); ++p) {
        BlockRef ref;
        ref.values = densified[p].dense_values().data();
        std::size_t stride = 1;
        const auto& blk = pq.p_blocks[p];
        for (int r = static_cast<int>(blk.size()) - 1; r >= 0; --r) {
            ref.elem_stride.push_back({blk[r], stride});
            stride *= static_cast<std::size_t>(d);
        }
        refs.push_back(std::move(ref));
    }

    Accum acc;
    std::vector<int> idx(ground, 0);
    do {
        double term = 1.0;
        for (const auto& ref : refs) {
            std::size_t offset = 0;
            for (const auto& [e, s] : ref.elem_stride) offset += s * static_cast<std::size_t>(idx[e]);
            term *= ref.values[offset];
            if (term == 0.0) break;
        }
        if (term != 0.0) {
            for (const auto& pr : pq.q_pairs) term *= inverse2(idx[pr[0]], idx[pr[1]]);
            acc.add(term);
        }
    } while (advance_odometer(idx, d));
    return acc.total();
}

namespace {

// All P-blocks diagonal: every block collapses to a single index, so the sum
// runs over v block indices instead of 2m element indices.
double contract_all_diagonal(const Bipartition& pq,
                             const std::vector<const DerivArray*>& block_arrays,
                             const Eigen::MatrixXd& inverse2) {
    const int d = static_cast<int>(inverse2.rows());
    const int v = pq.num_blocks();
    if (std::pow(static_cast<double>(d), v) > kDenseTupleCap)
        throw std::invalid_argument("diagonal contraction over d^v tuples exceeds the cap");
    std::vector<int> block_of(pq.ground_size());
    for (int p = 0; p < v; ++p)
        for (int e : pq.p_blocks[p]) block_of[e] = p;

    Accum acc;
    std::vector<int> b(v, 0);
    do {
        double term = 1.0;
        for (int p = 0; p < v; ++p) {
            term *= block_arrays[p]->diagonal_values()[b[p]];
            if (term == 0.0) break;
        }
        if (term != 0.0) {
            for (const auto& pr : pq.q_pairs)
                term *= inverse2(b[block_of[pr[0]]], b[block_of[pr[1]]]);
            acc.add(term);
        }
    } while (advance_odometer(b, d));
    return acc.total();
}

// Every block diagonal or outer-sum: stream over one rank-1 term per block.
// Summing the element indices first turns each Q-pair (s, t) into the
// bilinear form z_s' * inv2 * z_t of the chosen factors.
double contract_streaming(const Bipartition& pq,
                          const std::vector<const DerivArray*>& block_arrays,
                          const Eigen::MatrixXd& inverse2) {
    const int d = static_cast<int>(inverse2.rows());
    const int v = pq.num_blocks();

    std::vector<std::vector<OuterTerm>> terms(v);
    for (int p = 0; p < v; ++p) {
        const DerivArray* a = block_arrays[p];
        if (a->storage() == DerivArray::Storage::OuterSum) {
            terms[p] = a->outer_terms();
        } else {
            for (int j = 0; j < d; ++j) {
                double w = a->diagonal_values()[j];
                if (w == 0.0) continue;
                OuterTerm t;
                t.weight = w;
                t.factor = Eigen::VectorXd::Zero(d);
                t.factor[j] = 1.0;
                terms[p].push_back(std::move(t));
            }
        }
    }

    // inv2 * z, precomputed once per term.
    std::vector<std::vector<Eigen::VectorXd>> solved(v);
    for (int p = 0; p < v; ++p) {
        solved[p].reserve(terms[p].size());
        for (const auto& t : terms[p]) solved[p].push_back(inverse2 * t.factor);
    }

    std::vector<int> block_of(pq.ground_size());
    for (int p = 0; p < v; ++p)
        for (int e : pq.p_blocks[p]) block_of[e] = p;

    std::vector<int> counts(v);
    for (int p = 0; p < v; ++p) {
        counts[p] = static_cast<int>(terms[p].size());
        if (counts[p] == 0) return 0.0;
    }

    Accum acc;
    std::vector<int> pick(v, 0);
    do {
        double term = 1.0;
        for (int p = 0; p < v; ++p) term *= terms[p][pick[p]].weight;
        if (term != 0.0) {
            for (const auto& pr : pq.q_pairs) {
                int ps = block_of[pr[0]], pt = block_of[pr[1]];
                term *= terms[ps][pick[ps]].factor.dot(solved[pt][pick[pt]]);
            }
            acc.add(term);
        }
        // mixed-radix odometer over per-block term counts
        int pos = v - 1;
        while (pos >= 0) {
            if (++pick[pos] < counts[pos]) break;
            pick[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    } while (true);
    return acc.total();
}

}  // namespace

double contract_bipartition(const Bipartition& pq,
                            const std::vector<const DerivArray*>& block_arrays,
                            const Eigen::MatrixXd& inverse2) {
    check_contract_args(pq, block_arrays, inverse2);

    bool all_diagonal = true;
    bool streamable = true;
    double stream_terms = 1.0;
    const int d = static_cast<int>(inverse2.rows());
    for (const DerivArray* a : block_arrays) {
        switch (a->storage()) {
            case DerivArray::Storage::Diagonal:
                stream_terms *= d;
                break;
            case DerivArray::Storage::OuterSum:
                all_diagonal = false;
                stream_terms *= std::max<std::size_t>(a->outer_terms().size(), 1);
                break;
            case DerivArray::Storage::Dense:
                all_diagonal = false;
                streamable = false;
                break;
        }
    }
    if (all_diagonal) return contract_all_diagonal(pq, block_arrays, inverse2);
    if (streamable && stream_terms <= kStreamTermCap)
        return contract_streaming(pq, block_arrays, inverse2);
    return contract_bipartition_dense(pq, block_arrays, inverse2);
}

}  // namespace hola
