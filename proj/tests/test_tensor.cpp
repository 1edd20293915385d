#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hola/tensor.hpp"

using namespace hola;

namespace {

// Dense symmetric random array: symmetrize by averaging over permutations of
// each index tuple (equality across permutations is the invariant we need).
DerivArray random_symmetric_dense(int order, int dim, std::mt19937& rng) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::size_t size = 1;
    for (int r = 0; r < order; ++r) size *= static_cast<std::size_t>(dim);
    std::vector<double> raw(size);
    for (auto& v : raw) v = unif(rng);

    std::vector<double> sym(size, 0.0);
    std::vector<int> idx(order, 0);
    std::size_t flat = 0;
    while (true) {
        std::vector<int> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        std::size_t canon = 0;
        for (int i : sorted) canon = canon * dim + static_cast<std::size_t>(i);
        sym[flat] = raw[canon];
        ++flat;
        int pos = order - 1;
        while (pos >= 0 && ++idx[pos] == dim) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return DerivArray::dense(order, dim, std::move(sym));
}

Bipartition make(std::vector<std::vector<int>> p, std::vector<std::array<int, 2>> q) {
    Bipartition b;
    b.p_blocks = std::move(p);
    b.q_pairs = std::move(q);
    b.validate();
    return b;
}

}  // namespace

TEST_CASE("row-sum norms on identity, diagonal and hand-worked dense arrays") {
    DerivArray ident = DerivArray::dense(Eigen::MatrixXd::Identity(3, 3));
    CHECK(row_sum_norms(ident).max_norm == doctest::Approx(1.0).epsilon(1e-15));

    Eigen::VectorXd diag(3);
    diag << 2.0, -5.0, 1.0;
    DerivArray d3 = DerivArray::diagonal(3, diag);
    auto r = row_sum_norms(d3);
    CHECK(r.max_norm == doctest::Approx(5.0).epsilon(1e-15));
    for (const auto& axis : r.per_axis) {
        CHECK(axis[0] == doctest::Approx(2.0));
        CHECK(axis[1] == doctest::Approx(5.0));
        CHECK(axis[2] == doctest::Approx(1.0));
    }

    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0, 3.0;
    auto rm = row_sum_norms(DerivArray::dense(m));
    CHECK(rm.per_axis[0][0] == doctest::Approx(3.0));
    CHECK(rm.per_axis[0][1] == doctest::Approx(5.0));
    CHECK(rm.per_axis[1][0] == doctest::Approx(3.0));
    CHECK(rm.per_axis[1][1] == doctest::Approx(5.0));
    CHECK(rm.max_norm == doctest::Approx(5.0));
}

TEST_CASE("order-1 row sums are the absolute entries") {
    std::vector<double> v = {1.5, -2.0, 0.25};
    auto r = row_sum_norms(DerivArray::dense(1, 3, v));
    CHECK(r.per_axis.size() == 1);
    CHECK(r.per_axis[0][1] == doctest::Approx(2.0));
    CHECK(r.max_norm == doctest::Approx(2.0));
}

TEST_CASE("asymmetric dense input is rejected") {
    std::vector<double> bad = {1.0, 2.0, 0.0, 3.0};
    CHECK_THROWS_AS(DerivArray::dense(2, 2, bad), std::invalid_argument);
}

TEST_CASE("dense reads are permutation invariant") {
    std::mt19937 rng(7);
    DerivArray a = random_symmetric_dense(3, 4, rng);
    std::vector<int> idx = {2, 0, 3};
    std::vector<int> perm = {3, 2, 0};
    CHECK(a.at(idx) == a.at(perm));
}

TEST_CASE("outer-sum arrays are symmetric by construction and densify correctly") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<OuterTerm> terms;
    for (int t = 0; t < 4; ++t) {
        OuterTerm term;
        term.weight = unif(rng);
        term.factor = Eigen::VectorXd::NullaryExpr(3, [&](int) { return unif(rng); });
        terms.push_back(term);
    }
    DerivArray a = DerivArray::outer_sum(3, 3, terms);
    DerivArray dense = a.to_dense();
    std::vector<int> idx = {0, 2, 1};
    std::vector<int> perm = {2, 1, 0};
    CHECK(a.at(idx) == a.at(perm));
    CHECK(dense.at(idx) == doctest::Approx(a.at(idx)).epsilon(1e-12));

    auto ra = row_sum_norms(a);
    auto rd = row_sum_norms(dense);
    CHECK(ra.max_norm == doctest::Approx(rd.max_norm).epsilon(1e-12));
}

TEST_CASE("normalization cancels matched diagonals and scales the inverse") {
    // diagonal g3 with entries equal to the normalizers collapses to ones
    Eigen::VectorXd n(3);
    n << 4.0, 9.0, 25.0;
    DerivArray g3 = DerivArray::diagonal(3, n);
    DerivArray f3 = normalize_deriv(g3, n);
    for (int j = 0; j < 3; ++j)
        CHECK(f3.diagonal_values()[j] == doctest::Approx(1.0).epsilon(1e-14));

    // d = 1: inverse 1/n scales back to 1
    Eigen::MatrixXd inv1(1, 1);
    inv1 << 1.0 / 7.0;
    Eigen::VectorXd n1(1);
    n1 << 7.0;
    CHECK(normalize_inverse2(inv1, n1)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

    // d = 2: g2 = diag(4, 9) with n = (4, 9) normalizes the inverse to identity
    Eigen::MatrixXd g2 = Eigen::Vector2d(4.0, 9.0).asDiagonal();
    Eigen::MatrixXd inv2 = g2.inverse();
    Eigen::VectorXd n2(2);
    n2 << 4.0, 9.0;
    Eigen::MatrixXd f_inv = normalize_inverse2(inv2, n2);
    CHECK(f_inv.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-14));

    Eigen::VectorXd bad(3);
    bad << 1.0, 0.0, 2.0;
    CHECK_THROWS_AS(normalize_deriv(g3, bad), std::invalid_argument);
}

TEST_CASE("normalization acts entrywise on dense and outer-sum storage") {
    std::mt19937 rng(67);
    Eigen::VectorXd n(3);
    n << 2.0, 5.0, 11.0;

    DerivArray dense = random_symmetric_dense(3, 3, rng);
    DerivArray f = normalize_deriv(dense, n);
    std::vector<int> idx = {0, 2, 1};
    double scale = std::pow(n[0] * n[2] * n[1], -1.0 / 3.0);
    CHECK(f.at(idx) == doctest::Approx(dense.at(idx) * scale).epsilon(1e-13));

    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<OuterTerm> terms(3);
    for (auto& t : terms) {
        t.weight = unif(rng);
        t.factor = Eigen::VectorXd::NullaryExpr(3, [&](int) { return unif(rng); });
    }
    DerivArray sos = DerivArray::outer_sum(4, 3, terms);
    DerivArray fs = normalize_deriv(sos, n);
    DerivArray fd = normalize_deriv(sos.to_dense(), n);
    std::vector<int> idx4 = {1, 0, 2, 1};
    CHECK(fs.at(idx4) == doctest::Approx(fd.at(idx4)).epsilon(1e-12));
}

TEST_CASE("mixed diagonal and outer-sum blocks stream correctly") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Bipartition b = make({{0, 1, 2}, {3, 4, 5}}, {{0, 1}, {2, 3}, {4, 5}});
    const int d = 3;

    Eigen::VectorXd diag = Eigen::VectorXd::NullaryExpr(d, [&](int) { return unif(rng); });
    DerivArray a = DerivArray::diagonal(3, diag);
    std::vector<OuterTerm> terms(4);
    for (auto& t : terms) {
        t.weight = unif(rng);
        t.factor = Eigen::VectorXd::NullaryExpr(d, [&](int) { return unif(rng); });
    }
    DerivArray c = DerivArray::outer_sum(3, d, terms);
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return unif(rng); });
    Eigen::MatrixXd inv2 = 0.5 * (m + m.transpose()) + 2.0 * Eigen::MatrixXd::Identity(d, d);

    double streamed = contract_bipartition(b, {&a, &c}, inv2);
    double dense = contract_bipartition_dense(b, {&a, &c}, inv2);
    CHECK(streamed == doctest::Approx(dense).epsilon(1e-12));
}

TEST_CASE("product bound: row-sum norm of an index-overlapping product") {
    // C_j = A_(j_S) B_(j_T) with S and T overlapping: the norm of C never
    // exceeds the product of the norms.  Exact inequality, checked over
    // random shapes.
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> dim_dist(2, 5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    for (int trial = 0; trial < 60; ++trial) {
        int k = std::uniform_int_distribution<int>(2, 4)(rng);
        int d = dim_dist(rng);

        // random S, T covering {0..k-1} with nonempty intersection
        std::vector<int> s_axes, t_axes;
        bool ok = false;
        while (!ok) {
            s_axes.clear();
            t_axes.clear();
            for (int i = 0; i < k; ++i) {
                int where = std::uniform_int_distribution<int>(0, 2)(rng);
                if (where == 0) s_axes.push_back(i);
                if (where == 1) t_axes.push_back(i);
                if (where == 2) {
                    s_axes.push_back(i);
                    t_axes.push_back(i);
                }
            }
            std::vector<int> inter;
            std::set_intersection(s_axes.begin(), s_axes.end(), t_axes.begin(),
                                  t_axes.end(), std::back_inserter(inter));
            ok = !s_axes.empty() && !t_axes.empty() && !inter.empty();
        }

        auto fill = [&](int order) {
            std::size_t size = 1;
            for (int r = 0; r < order; ++r) size *= static_cast<std::size_t>(d);
            std::vector<double> v(size);
            for (auto& x : v) x = unif(rng);
            return v;
        };
        std::vector<double> a = fill(static_cast<int>(s_axes.size()));
        std::vector<double> b = fill(static_cast<int>(t_axes.size()));

        std::size_t c_size = 1;
        for (int r = 0; r < k; ++r) c_size *= static_cast<std::size_t>(d);
        std::vector<double> c(c_size);
        std::vector<int> idx(k, 0);
        std::size_t flat = 0;
        while (true) {
            std::size_t ia = 0, ib = 0;
            for (int ax : s_axes) ia = ia * d + static_cast<std::size_t>(idx[ax]);
            for (int ax : t_axes) ib = ib * d + static_cast<std::size_t>(idx[ax]);
            c[flat++] = a[ia] * b[ib];
            int pos = k - 1;
            while (pos >= 0 && ++idx[pos] == d) idx[pos--] = 0;
            if (pos < 0) break;
        }

        double na = row_sum_norms_dense(a.data(), static_cast<int>(s_axes.size()), d).max_norm;
        double nb = row_sum_norms_dense(b.data(), static_cast<int>(t_axes.size()), d).max_norm;
        double nc = row_sum_norms_dense(c.data(), k, d).max_norm;
        CHECK(nc <= na * nb * (1.0 + 1e-12));
    }
}

TEST_CASE("contraction: single index tuple at d = 1") {
    // one quartic block, pairs (0 1 | 2 3): c / g2^2
    Bipartition b = make({{0, 1, 2, 3}}, {{0, 1}, {2, 3}});
    double c = 2.75, g2 = 1.6;
    Eigen::VectorXd diag(1);
    diag << c;
    DerivArray g4 = DerivArray::diagonal(4, diag);
    Eigen::MatrixXd inv2(1, 1);
    inv2 << 1.0 / g2;
    double got = contract_bipartition(b, {&g4}, inv2);
    CHECK(got == doctest::Approx(c / (g2 * g2)).epsilon(1e-14));
}

TEST_CASE("diagonal fast path matches the dense loop") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    Bipartition b = make({{0, 1, 2}, {3, 4, 5}}, {{0, 1}, {2, 3}, {4, 5}});

    for (int d : {2, 3}) {
        Eigen::VectorXd diag = Eigen::VectorXd::NullaryExpr(d, [&](int) { return unif(rng); });
        DerivArray g3 = DerivArray::diagonal(3, diag);
        Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return unif(rng); });
        Eigen::MatrixXd inv2 = 0.5 * (m + m.transpose()) + 3.0 * Eigen::MatrixXd::Identity(d, d);

        double fast = contract_bipartition(b, {&g3, &g3}, inv2);
        double dense = contract_bipartition_dense(b, {&g3, &g3}, inv2);
        CHECK(fast == doctest::Approx(dense).epsilon(1e-12));
    }

    // identity inverse: the collapsed sum is just sum_j diag_j^2
    Eigen::VectorXd diag(2);
    diag << 1.25, -0.5;
    DerivArray g3 = DerivArray::diagonal(3, diag);
    Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    double got = contract_bipartition(b, {&g3, &g3}, eye);
    CHECK(got == doctest::Approx(diag[0] * diag[0] + diag[1] * diag[1]).epsilon(1e-14));
}

TEST_CASE("streaming outer-sum path matches the dense loop") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Bipartition b = make({{0, 1, 2}, {3, 4, 5}}, {{0, 3}, {1, 4}, {2, 5}});

    const int d = 3;
    auto make_terms = [&](int count) {
        std::vector<OuterTerm> terms;
        for (int t = 0; t < count; ++t) {
            OuterTerm term;
            term.weight = unif(rng);
            term.factor = Eigen::VectorXd::NullaryExpr(d, [&](int) { return unif(rng); });
            terms.push_back(term);
        }
        return terms;
    };
    DerivArray a = DerivArray::outer_sum(3, d, make_terms(5));
    DerivArray c = DerivArray::outer_sum(3, d, make_terms(4));
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return unif(rng); });
    Eigen::MatrixXd inv2 = 0.5 * (m + m.transpose()) + 2.0 * Eigen::MatrixXd::Identity(d, d);

    double streamed = contract_bipartition(b, {&a, &c}, inv2);
    double dense = contract_bipartition_dense(b, {&a, &c}, inv2);
    CHECK(streamed == doctest::Approx(dense).epsilon(1e-12));
}

TEST_CASE("random dense contraction against the brute-force loop") {
    std::mt19937 rng(29);
    Bipartition b = make({{0, 1, 2, 3}}, {{0, 1}, {2, 3}});
    for (int d : {2, 3}) {
        DerivArray g4 = random_symmetric_dense(4, d, rng);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return unif(rng); });
        Eigen::MatrixXd inv2 = 0.5 * (m + m.transpose()) + 2.0 * Eigen::MatrixXd::Identity(d, d);

        // independent nested-loop evaluation
        double expected = 0.0;
        for (int j0 = 0; j0 < d; ++j0)
            for (int j1 = 0; j1 < d; ++j1)
                for (int j2 = 0; j2 < d; ++j2)
                    for (int j3 = 0; j3 < d; ++j3)
                        expected += g4.at({j0, j1, j2, j3}) * inv2(j0, j1) * inv2(j2, j3);

        double got = contract_bipartition(b, {&g4}, inv2);
        CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("every member of an isomorphism class contracts to the same value") {
    std::mt19937 rng(83);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int d = 2;
    DerivArray g3 = random_symmetric_dense(3, d, rng);
    DerivArray g4 = random_symmetric_dense(4, d, rng);
    DerivArray g5 = random_symmetric_dense(5, d, rng);
    DerivArray g6 = random_symmetric_dense(6, d, rng);
    Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(d, d, [&](int, int) { return unif(rng); });
    Eigen::MatrixXd inv2 = 0.5 * (m + m.transpose()) + 2.0 * Eigen::MatrixXd::Identity(d, d);

    auto array_for = [&](int order) -> const DerivArray* {
        switch (order) {
            case 3: return &g3;
            case 4: return &g4;
            case 5: return &g5;
            case 6: return &g6;
        }
        throw std::logic_error("unexpected block size");
    };

    for (int level : {1, 2}) {
        std::map<std::string, std::vector<double>> values;
        for (const auto& b : enumerate_connected_exhaustive(level)) {
            std::vector<const DerivArray*> blocks;
            for (const auto& blk : b.p_blocks)
                blocks.push_back(array_for(static_cast<int>(blk.size())));
            values[canonical_signature(b)].push_back(contract_bipartition(b, blocks, inv2));
        }
        for (const auto& [sig, vals] : values) {
            for (double v : vals)
                CHECK(v == doctest::Approx(vals.front()).epsilon(1e-11));
        }
    }
}

TEST_CASE("contraction argument validation") {
    Bipartition b = make({{0, 1, 2, 3}}, {{0, 1}, {2, 3}});
    Eigen::VectorXd diag(2);
    diag << 1.0, 2.0;
    DerivArray wrong_order = DerivArray::diagonal(3, diag);
    Eigen::MatrixXd inv2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(contract_bipartition(b, {&wrong_order}, inv2), std::invalid_argument);

    DerivArray g4 = DerivArray::diagonal(4, diag);
    Eigen::MatrixXd inv3 = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(contract_bipartition(b, {&g4}, inv3), std::invalid_argument);
}
