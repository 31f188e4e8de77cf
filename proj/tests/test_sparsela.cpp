#include <catch2/catch_amalgamated.hpp>

#include "biotmix/assembly.hpp"
#include "biotmix/dense.hpp"
#include "biotmix/krylov.hpp"
#include "biotmix/ldlt.hpp"

using namespace biotmix;

namespace {

CsrMatrix random_sparse(int n, uint64_t seed, double density = 0.4) {
    const Vector u = seeded_random_vector(n * n, seed);
    TripletBuilder tb(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(u[i * n + j]) < density) tb.add(i, j, u[i * n + j]);
    for (int i = 0; i < n; ++i) tb.add(i, i, 1.0);
    return tb.compress();
}

// random SPD built as M^T M + I
CsrMatrix random_spd(int n, uint64_t seed) {
    const CsrMatrix m = random_sparse(n, seed);
    const DenseMatrix d = to_dense(m);
    DenseMatrix s = matmul(transpose(d), d);
    for (int i = 0; i < n; ++i) s(i, i) += 1.0;
    TripletBuilder tb(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (s(i, j) != 0.0) tb.add(i, j, s(i, j));
    return tb.compress();
}

} // namespace

TEST_CASE("spmv basics and dense oracle", "[sparsela]") {
    SECTION("identity and zero") {
        TripletBuilder tb(3, 3);
        for (int i = 0; i < 3; ++i) tb.add(i, i, 1.0);
        const CsrMatrix id = tb.compress();
        const Vector x = {1.0, -2.0, 3.0};
        CHECK(spmv(id, x) == x);

        TripletBuilder tz(3, 3);
        tz.add(0, 0, 0.0);
        const CsrMatrix zero = tz.compress();
        for (double v : spmv(zero, x)) CHECK(v == 0.0);
    }
    SECTION("random 5x5 against the dense product") {
        const CsrMatrix m = random_sparse(5, 7);
        const DenseMatrix d = to_dense(m);
        const Vector x = seeded_random_vector(5, 99);
        const Vector y = spmv(m, x);
        const Vector yd = matvec(d, x);
        for (int i = 0; i < 5; ++i)
            CHECK_THAT(y[i], Catch::Matchers::WithinRel(yd[i], 1e-14));
    }
    SECTION("dimension mismatch throws") {
        const CsrMatrix m = random_sparse(5, 7);
        CHECK_THROWS_AS(spmv(m, Vector(4, 0.0)), std::invalid_argument);
    }
}

TEST_CASE("triplets with duplicates accumulate", "[sparsela]") {
    TripletBuilder tb(2, 2);
    tb.add(0, 1, 1.5);
    tb.add(0, 1, 2.5);
    tb.add(1, 0, -1.0);
    const CsrMatrix m = tb.compress();
    CHECK(m.nnz() == 2);
    CHECK(m.entry(0, 1) == 4.0);
    CHECK(m.entry(1, 0) == -1.0);
}

TEST_CASE("ldlt factor and solve", "[sparsela]") {
    SECTION("diagonal matrix") {
        TripletBuilder tb(4, 4);
        for (int i = 0; i < 4; ++i) tb.add(i, i, double(i + 1));
        const SymFactor f = ldlt_factor(tb.compress());
        const Vector b = {1.0, 2.0, 3.0, 4.0};
        const Vector x = ldlt_solve(f, b);
        for (int i = 0; i < 4; ++i)
            CHECK_THAT(x[i], Catch::Matchers::WithinRel(b[i] / (i + 1), 1e-15));
    }
    SECTION("2x2 hand solve") {
        TripletBuilder tb(2, 2);
        tb.add(0, 0, 2.0);
        tb.add(0, 1, 1.0);
        tb.add(1, 0, 1.0);
        tb.add(1, 1, 2.0);
        const SymFactor f = ldlt_factor(tb.compress());
        const Vector x = ldlt_solve(f, {3.0, 3.0});
        CHECK_THAT(x[0], Catch::Matchers::WithinRel(1.0, 1e-14));
        CHECK_THAT(x[1], Catch::Matchers::WithinRel(1.0, 1e-14));
    }
    SECTION("round trip on 100 random SPD instances") {
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 3 + trial % 20;
            const CsrMatrix m = random_spd(n, 1000 + trial);
            const SymFactor f = ldlt_factor(m);
            const Vector b = seeded_random_vector(n, 2000 + trial);
            const Vector x = ldlt_solve(f, b);
            Vector r = b;
            spmv_add(m, x, -1.0, r);
            REQUIRE(norm2(r) <= 1e-10 * norm2(b));
        }
    }
    SECTION("indefinite matrix is rejected") {
        TripletBuilder tb(2, 2);
        tb.add(0, 0, 1.0);
        tb.add(0, 1, 3.0);
        tb.add(1, 0, 3.0);
        tb.add(1, 1, 1.0);  // eigenvalues 4, -2
        CHECK_THROWS_AS(ldlt_factor(tb.compress()), std::runtime_error);
    }
    SECTION("assembled pressure block at N=4 against a dense solve") {
        const TriMesh mesh = build_unit_square_mesh(4);
        const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
        const DofMap pdm = build_space(mesh, tags, SpaceKind::pressure);
        const ParameterSet params = ParameterSet::make(0.5, 1.0, 1.0, 1.0);
        const CsrMatrix q = assemble_pressure_block(mesh, pdm, params);
        const SymFactor f = ldlt_factor(q);
        const Vector b = seeded_random_vector(q.nrows, 4242);
        const Vector x = ldlt_solve(f, b);
        const Vector xd = cholesky_solve(cholesky(to_dense(q)), b);
        double diff = 0.0;
        for (int i = 0; i < q.nrows; ++i) diff = std::max(diff, std::abs(x[i] - xd[i]));
        CHECK(diff <= 1e-10 * norm2(xd));
    }
}

TEST_CASE("spmv matches the dense product on every assembled matrix", "[sparsela]") {
    const TriMesh mesh = build_unit_square_mesh(1);
    const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
    const StressBasisTable basis(mesh);
    const DofMap pdm = build_space(mesh, tags, SpaceKind::pressure);
    const ParameterSet params = ParameterSet::make(0.5, 3.0, 0.7, 0.5);
    const std::vector<CsrMatrix> mats = {
        assemble_A(mesh, basis, params),       assemble_stress_mass(mesh, basis),
        assemble_divdiv(mesh, basis),          assemble_sigma_riesz(mesh, basis, params),
        assemble_bulk_coupling(mesh, basis, params),
        assemble_pressure_block(mesh, pdm, params),
        assemble_div(mesh, basis),             assemble_skw(mesh, basis)};
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const CsrMatrix& m = mats[k];
        const Vector x = seeded_random_vector(m.ncols, 7000 + k);
        const Vector y = spmv(m, x);
        const Vector yd = matvec(to_dense(m), x);
        for (int i = 0; i < m.nrows; ++i)
            CHECK_THAT(y[i], Catch::Matchers::WithinAbs(yd[i], 1e-14 * (1.0 + std::abs(yd[i]))));
    }
}

TEST_CASE("rcm produces a permutation", "[sparsela]") {
    const CsrMatrix m = random_spd(30, 5);
    const std::vector<int> p = rcm_ordering(m);
    REQUIRE(p.size() == 30);
    std::vector<uint8_t> seen(30, 0);
    for (int v : p) {
        REQUIRE(v >= 0);
        REQUIRE(v < 30);
        REQUIRE(!seen[v]);
        seen[v] = 1;
    }
}

TEST_CASE("dense generalized symmetric eigensolver", "[sparsela]") {
    SECTION("A = B gives all ones, A = 2B gives all twos") {
        const CsrMatrix bs = random_spd(6, 11);
        const DenseMatrix b = to_dense(bs);
        DenseMatrix a2 = b;
        for (double& v : a2.a) v *= 2.0;
        for (double e : dense_sym_geig(b, b)) CHECK_THAT(e, Catch::Matchers::WithinRel(1.0, 1e-12));
        for (double e : dense_sym_geig(a2, b)) CHECK_THAT(e, Catch::Matchers::WithinRel(2.0, 1e-12));
    }
    SECTION("random 6x6 pair against residual, trace, and determinant oracles") {
        const DenseMatrix a0 = to_dense(random_sparse(6, 21));
        DenseMatrix a = matmul(transpose(a0), a0);
        for (int i = 0; i < 6; ++i) a(i, i) -= 0.7;  // make it indefinite
        const DenseMatrix b = to_dense(random_spd(6, 22));

        DenseMatrix vecs;
        const Vector eig = dense_sym_geig(a, b, &vecs);
        REQUIRE(eig.size() == 6);
        for (std::size_t i = 1; i < eig.size(); ++i) CHECK(eig[i] >= eig[i - 1]);

        for (int j = 0; j < 6; ++j) {
            Vector v(6);
            for (int i = 0; i < 6; ++i) v[i] = vecs(i, j);
            const Vector av = matvec(a, v);
            const Vector bv = matvec(b, v);
            double res = 0.0;
            for (int i = 0; i < 6; ++i) res = std::max(res, std::abs(av[i] - eig[j] * bv[i]));
            CHECK(res <= 1e-8 * norm2(v) * (std::abs(eig[j]) + 1.0));
        }

        // sum of eigenvalues = trace(B^{-1} A), product = det(A)/det(B)
        double trace = 0.0;
        const DenseMatrix lb = cholesky(b);
        for (int j = 0; j < 6; ++j) {
            Vector col(6);
            for (int i = 0; i < 6; ++i) col[i] = a(i, j);
            trace += cholesky_solve(lb, col)[j];
        }
        double eig_sum = 0.0, eig_prod = 1.0;
        for (double e : eig) {
            eig_sum += e;
            eig_prod *= e;
        }
        CHECK_THAT(eig_sum, Catch::Matchers::WithinRel(trace, 1e-10));
        CHECK_THAT(eig_prod,
                   Catch::Matchers::WithinRel(lu_determinant(a) / lu_determinant(b), 1e-9));
    }
    SECTION("non-SPD B is rejected") {
        DenseMatrix a = DenseMatrix::identity(3);
        DenseMatrix b = DenseMatrix::identity(3);
        b(2, 2) = -1.0;
        CHECK_THROWS_AS(dense_sym_geig(a, b), std::runtime_error);
    }
}

TEST_CASE("matrix market round trip", "[sparsela]") {
    SECTION("general") {
        const CsrMatrix m = random_sparse(8, 31);
        std::stringstream ss;
        write_matrix_market(m, ss, false);
        const CsrMatrix back = read_matrix_market(ss);
        REQUIRE(back.nrows == m.nrows);
        REQUIRE(back.nnz() == m.nnz());
        for (int i = 0; i < m.nrows; ++i)
            for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
                CHECK(back.entry(i, m.col_idx[k]) == m.values[k]);
    }
    SECTION("symmetric storage stores the lower triangle only") {
        const CsrMatrix m = random_spd(6, 32);
        std::stringstream ss;
        write_matrix_market(m, ss, true);
        const std::string text = ss.str();
        CHECK(text.find("symmetric") != std::string::npos);
        std::stringstream in(text);
        const CsrMatrix back = read_matrix_market(in);
        for (int i = 0; i < m.nrows; ++i)
            for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
                CHECK(back.entry(i, m.col_idx[k]) == m.values[k]);
    }
}

TEST_CASE("assembled systems are symmetric to the bit and export losslessly", "[sparsela]") {
    const TriMesh mesh = build_unit_square_mesh(2);
    const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
    const StressBasisTable basis(mesh);
    const FourFieldSpaces spaces = build_all_spaces(mesh, tags);
    const BlockSystem sys = assemble_system(
        mesh, basis, spaces, ParameterSet::make(0.5, 1e8, 1e-4, 1e-4, true), true);
    CHECK(max_asymmetry(sys.full) == 0.0);

    std::stringstream ss;
    write_matrix_market(sys.full, ss, true);
    const CsrMatrix back = read_matrix_market(ss);
    double worst = 0.0;
    for (int i = 0; i < sys.full.nrows; ++i)
        for (int k = sys.full.row_ptr[i]; k < sys.full.row_ptr[i + 1]; ++k)
            worst = std::max(worst,
                             std::abs(sys.full.values[k] - back.entry(i, sys.full.col_idx[k])));
    CHECK(worst == 0.0);
}

TEST_CASE("constraint elimination keeps symmetry and unit diagonal", "[sparsela]") {
    CsrMatrix m = random_spd(6, 41);
    std::vector<uint8_t> mask(6, 0);
    mask[2] = mask[5] = 1;
    apply_constraints(m, mask);
    CHECK(m.entry(2, 2) == 1.0);
    CHECK(m.entry(5, 5) == 1.0);
    for (int j = 0; j < 6; ++j) {
        if (j != 2) CHECK(m.entry(2, j) == 0.0);
        if (j != 5) CHECK(m.entry(j, 5) == 0.0);
    }
    CHECK(max_asymmetry(m) == 0.0);
}
