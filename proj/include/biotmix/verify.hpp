#pragma once

#include "biotmix/precond.hpp"

namespace biotmix {

// ---------------------------------------------------------------------------
// Numerical verification of the stability theory at tiny mesh sizes.
//
// All pencils are oriented (norm matrix, operator matrix), so the stability
// statements read: eigenvalues lie in [1, C] with C independent of lambda.
// ---------------------------------------------------------------------------

struct PencilRow {
    double lambda = 0.0;
    double eig_min = 0.0;
    double eig_max = 0.0;
};

namespace detail {

// compliance split A = (1/2mu) M_dev + 1/(2mu + n lambda) M_tr keeps the two
// scales separate at extreme lambda
struct StressForms {
    CsrMatrix mass_dev, mass_tr, divdiv, riesz;
    Vector m, w;
    double area = 0.0;
};

inline StressForms build_stress_forms(const TriMesh& mesh, const StressBasisTable& basis,
                                      const DofMap& stress_dm, double mu) {
    StressForms f;
    f.mass_dev = assemble_stress_form(
        mesh, basis, [](const Mat2& t, Vec2) { return deviatoric_part(t); });
    f.mass_tr = assemble_stress_form(mesh, basis, [](const Mat2& t, Vec2) {
        return (t.trace() / ParameterSet::dim) * Mat2::identity();
    });
    f.divdiv = assemble_divdiv(mesh, basis);
    f.riesz = assemble_sigma_riesz(mesh, basis, ParameterSet::make(mu, 1.0));
    f.m = assemble_m_vector(mesh, basis);
    f.area = domain_area(mesh);
    if (stress_dm.constrained_count() == 0) f.w = interpolate_identity(stress_dm, mesh);
    return f;
}

inline DenseMatrix operator_matrix(const StressForms& f, const ParameterSet& p) {
    DenseMatrix op = to_dense(f.mass_dev);
    const DenseMatrix tr = to_dense(f.mass_tr);
    const DenseMatrix dd = to_dense(f.divdiv);
    const double c_dev = 1.0 / (2.0 * p.mu);
    const double c_tr = 1.0 / p.trace_denom();
    for (std::size_t k = 0; k < op.a.size(); ++k)
        op.a[k] = c_dev * op.a[k] + c_tr * tr.a[k] + dd.a[k];
    return op;
}

// restriction of a symmetric matrix to the hyperplane m^T x = 0 using the
// Householder reflection that sends m to a coordinate axis
struct HyperplaneBasis {
    Vector v;
    double beta = 0.0;

    explicit HyperplaneBasis(const Vector& m) {
        v = m;
        const double nm = norm2(m);
        check_arg(nm > 0.0, "HyperplaneBasis: zero normal");
        v[0] += (m[0] >= 0.0 ? nm : -nm);
        beta = 2.0 / dot(v, v);
    }

    DenseMatrix restrict_matrix(const DenseMatrix& a) const {
        const int n = a.nrows;
        // H A H with H = I - beta v v^T, then drop row/column 0
        Vector av = matvec(a, v);
        const double vav = dot(v, av);
        DenseMatrix h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                h(i, j) = a(i, j) - beta * v[i] * av[j] - beta * av[i] * v[j] +
                          beta * beta * vav * v[i] * v[j];
        DenseMatrix out(n - 1, n - 1);
        for (int i = 1; i < n; ++i)
            for (int j = 1; j < n; ++j) out(i - 1, j - 1) = 0.5 * (h(i, j) + h(j, i));
        return out;
    }
};

} // namespace detail

/// Pencil of the weighted H(div) norm against the compliance-plus-divergence
/// operator on the traction-constrained stress space. Lower extreme is 1;
/// the upper extreme is the discrete equivalence constant.
inline std::vector<PencilRow> check_spectral_equivalence_nonclamped(
    int n, const std::vector<double>& lambdas, double mu = 0.5) {
    check_arg(n >= 1 && n <= 8, "spectral equivalence checks are dense; keep N small");
    const TriMesh mesh = build_unit_square_mesh(n);
    const BoundaryTags tags = classify_boundary(mesh, BcMode::mixed);
    const StressBasisTable basis(mesh);
    const DofMap sdm = build_space(mesh, tags, SpaceKind::stress);
    const detail::StressForms forms = detail::build_stress_forms(mesh, basis, sdm, mu);

    CsrMatrix riesz = forms.riesz;
    apply_constraints(riesz, sdm.constrained);
    const DenseMatrix norm_d = to_dense(riesz);

    std::vector<PencilRow> rows;
    for (double lambda : lambdas) {
        const ParameterSet params = ParameterSet::make(mu, lambda);
        DenseMatrix op = detail::operator_matrix(forms, params);
        // constrained dofs: unit diagonal in both matrices
        for (int i = 0; i < op.nrows; ++i)
            if (sdm.constrained[i]) {
                for (int j = 0; j < op.ncols; ++j) op(i, j) = op(j, i) = 0.0;
                op(i, i) = 1.0;
            }
        const Vector eig = dense_sym_geig(norm_d, op);
        rows.push_back({lambda, eig.front(), eig.back()});
    }
    return rows;
}

/// Clamped-space pencil. With the auxiliary norm the identity direction w is
/// an exact generalized eigenvector (eigenvalue one) and the complement
/// {m^T x = 0} decouples in both forms, where the rank-one term vanishes;
/// the deflated pencil is computed densely with lambda-uniform conditioning.
/// With plain_norm = true the plain weighted H(div) norm is kept instead,
/// whose identity-direction eigenvalue (2mu + n lambda)/(2mu) diverges; this
/// is the negative control for the auxiliary construction.
inline std::vector<PencilRow> check_spectral_equivalence_clamped(
    int n, const std::vector<double>& lambdas, bool plain_norm = false, double mu = 0.5) {
    check_arg(n >= 1 && n <= 8, "spectral equivalence checks are dense; keep N small");
    const TriMesh mesh = build_unit_square_mesh(n);
    const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
    const StressBasisTable basis(mesh);
    const DofMap sdm = build_space(mesh, tags, SpaceKind::stress);
    const detail::StressForms forms = detail::build_stress_forms(mesh, basis, sdm, mu);

    const detail::HyperplaneBasis hyper(forms.m);
    const DenseMatrix norm_defl = hyper.restrict_matrix(to_dense(forms.riesz));

    std::vector<PencilRow> rows;
    for (double lambda : lambdas) {
        const ParameterSet params = ParameterSet::make(mu, lambda);
        const DenseMatrix op_defl =
            hyper.restrict_matrix(detail::operator_matrix(forms, params));
        const Vector eig = dense_sym_geig(norm_defl, op_defl);
        // identity-direction eigenvalue, exact by the w/m identities
        const double theta_w = plain_norm ? params.trace_denom() / (2.0 * params.mu) : 1.0;
        rows.push_back({lambda, std::min(theta_w, eig.front()),
                        std::max(theta_w, eig.back())});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Discrete inf-sup constants of the coupled system
// ---------------------------------------------------------------------------

struct InfSupRow {
    int n = 0;
    double lambda = 0.0, alpha = 0.0, kappa = 0.0;
    double beta = 0.0;       // smallest |generalized eigenvalue|
    double boundedness = 0.0;  // largest |generalized eigenvalue|
};

inline InfSupRow check_infsup(int n, const ParameterSet& params, BcMode mode) {
    check_arg(n >= 1 && n <= 4, "check_infsup is dense; keep N small");
    const TriMesh mesh = build_unit_square_mesh(n);
    const BoundaryTags tags = classify_boundary(mesh, mode);
    const StressBasisTable basis(mesh);
    const FourFieldSpaces spaces = build_all_spaces(mesh, tags);
    const BlockSystem sys = assemble_system(mesh, basis, spaces, params);
    const int total = sys.dims.total();

    // block norm matrix
    DenseMatrix nm(total, total);
    {
        CsrMatrix riesz = assemble_sigma_riesz(mesh, basis, params);
        apply_constraints(riesz, spaces.stress.constrained);
        const DenseMatrix bsd = to_dense(riesz);
        for (int i = 0; i < sys.dims.nsigma; ++i)
            for (int j = 0; j < sys.dims.nsigma; ++j) nm(i, j) = bsd(i, j);
        if (tags.clamped()) {
            const Vector m = assemble_m_vector(mesh, basis);
            const double c = params.rho() / (2.0 * params.mu);
            for (int i = 0; i < sys.dims.nsigma; ++i)
                for (int j = 0; j < sys.dims.nsigma; ++j) nm(i, j) -= c * m[i] * m[j];
        }
        const DenseMatrix q = to_dense(sys.pressure);
        const int op = sys.dims.offset_p();
        for (int i = 0; i < sys.dims.np; ++i)
            for (int j = 0; j < sys.dims.np; ++j) nm(op + i, op + j) = q(i, j);
        for (int i = 0; i < sys.dims.nu; ++i)
            nm(sys.dims.offset_u() + i, sys.dims.offset_u() + i) = sys.mass_u_diag[i];
        for (int i = 0; i < sys.dims.ngamma; ++i)
            nm(sys.dims.offset_gamma() + i, sys.dims.offset_gamma() + i) =
                sys.mass_gamma_diag[i];
    }

    const Vector eig = dense_sym_geig(to_dense(sys.full), nm);
    double amin = std::numeric_limits<double>::max(), amax = 0.0;
    for (double e : eig) {
        amin = std::min(amin, std::abs(e));
        amax = std::max(amax, std::abs(e));
    }
    return {n, params.lambda, params.alpha, params.kappa.value, amin, amax};
}

// ---------------------------------------------------------------------------
// Elasticity stability of the (stress, displacement, rotation) triple
// ---------------------------------------------------------------------------

struct StabilityRow {
    int n = 0;
    double constant = 0.0;  // smallest C with ||tau||_div <= C (||u|| + ||gamma||)
};

/// Exact discrete stability constant: the minimum-norm right inverse of the
/// combined (divergence, skew-moment) map has operator norm
/// 1/sqrt(theta_min) where theta_min is the smallest eigenvalue of
/// (G H^{-1} G^T, M) with H the H(div) Gram matrix, G the constraint matrix
/// and M the product mass matrix of the data space.
inline StabilityRow measure_elasticity_stability(int n) {
    check_arg(n >= 1 && n <= 4, "measure_elasticity_stability is dense; keep N small");
    const TriMesh mesh = build_unit_square_mesh(n);
    const BoundaryTags tags = classify_boundary(mesh, BcMode::clamped);
    const StressBasisTable basis(mesh);
    const CsrMatrix div = assemble_div(mesh, basis);
    const CsrMatrix skw = assemble_skw(mesh, basis);
    const CsrMatrix hdiv = csr_add(assemble_stress_mass(mesh, basis), 1.0,
                                   assemble_divdiv(mesh, basis), 1.0);
    const int nsigma = hdiv.nrows;
    const int nc = div.nrows + skw.nrows;

    DenseMatrix g(nc, nsigma);
    for (int i = 0; i < div.nrows; ++i)
        for (int k = div.row_ptr[i]; k < div.row_ptr[i + 1]; ++k)
            g(i, div.col_idx[k]) = div.values[k];
    for (int i = 0; i < skw.nrows; ++i)
        for (int k = skw.row_ptr[i]; k < skw.row_ptr[i + 1]; ++k)
            g(div.nrows + i, skw.col_idx[k]) = skw.values[k];

    const DenseMatrix l = cholesky(to_dense(hdiv));
    DenseMatrix hinv_gt(nsigma, nc);
    for (int j = 0; j < nc; ++j) {
        Vector col(nsigma);
        for (int i = 0; i < nsigma; ++i) col[i] = g(j, i);
        col = cholesky_solve(l, col);
        for (int i = 0; i < nsigma; ++i) hinv_gt(i, j) = col[i];
    }
    DenseMatrix schur(nc, nc);
    for (int i = 0; i < nc; ++i)
        for (int j = 0; j < nc; ++j) {
            double s = 0.0;
            for (int k = 0; k < nsigma; ++k) s += g(i, k) * hinv_gt(k, j);
            schur(i, j) = s;
        }
    for (int i = 0; i < nc; ++i)
        for (int j = i + 1; j < nc; ++j) {
            const double v = 0.5 * (schur(i, j) + schur(j, i));
            schur(i, j) = schur(j, i) = v;
        }
    DenseMatrix mass(nc, nc);
    const Vector mu_diag = displacement_mass_diag(mesh);
    const Vector mg_diag = rotation_mass_diag(mesh);
    for (int i = 0; i < div.nrows; ++i) mass(i, i) = mu_diag[i];
    for (int i = 0; i < skw.nrows; ++i) mass(div.nrows + i, div.nrows + i) = mg_diag[i];

    const Vector eig = dense_sym_geig(schur, mass);
    check_state(eig.front() > 0.0, "elasticity stability: constraint map not onto");
    return {n, 1.0 / std::sqrt(eig.front())};
}

} // namespace biotmix
