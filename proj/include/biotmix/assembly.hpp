#pragma once

#include "biotmix/spaces.hpp"
#include "biotmix/sparse.hpp"

namespace biotmix {

/// Hydraulic conductivity: either uniform or the y-banded field with the
/// given value on the strip 1/4 < y < 3/4 and 1 outside.
struct KappaField {
    double value = 1.0;
    bool banded = false;

    double operator()(Vec2 p) const {
        if (!banded) return value;
        return (p.y > 0.25 && p.y < 0.75) ? value : 1.0;
    }
};

/// Model parameters. mu is order one (1/2 in all experiments); the storage
/// coefficient defaults to alpha^2/lambda.
struct ParameterSet {
    double mu = 0.5;
    double lambda = 1.0;
    double alpha = 1.0;
    double s0 = 1.0;
    KappaField kappa;
    static constexpr int dim = 2;

    static ParameterSet make(double mu, double lambda, double alpha = 1.0,
                             double kappa_value = 1.0, bool kappa_banded = false) {
        ParameterSet p;
        p.mu = mu;
        p.lambda = lambda;
        p.alpha = alpha;
        p.s0 = lambda > 0.0 ? alpha * alpha / lambda : 0.0;
        p.kappa = {kappa_value, kappa_banded};
        return p;
    }

    double trace_denom() const { return 2.0 * mu + dim * lambda; }
    double rho() const { return dim * lambda / trace_denom(); }
    // computed directly, not as 1 - rho, to stay exact for large lambda
    double one_minus_rho() const { return 2.0 * mu / trace_denom(); }
    double storage_coeff() const { return s0 + dim * alpha * alpha / trace_denom(); }
};

/// Pointwise compliance: A sigma = (1/2mu)(sigma - lambda/(2mu+n lambda) tr(sigma) I).
inline Mat2 apply_A_pointwise(const Mat2& sigma, const ParameterSet& p) {
    const double c = p.lambda / p.trace_denom() * sigma.trace();
    return (1.0 / (2.0 * p.mu)) * (sigma - c * Mat2::identity());
}

inline Mat2 deviatoric_part(const Mat2& sigma) {
    const double c = 0.5 * sigma.trace();
    return sigma - c * Mat2::identity();
}

namespace detail {

// local matrix-shape index: l = 6*row + (2*local_edge + moment)
inline int stress_global_dof(const TriMesh& mesh, int cell, int local) {
    const int row = local / 6;
    const int s = local % 6;
    return DofMap::stress_dof(mesh.cell_edges[cell][s / 2], row, s % 2);
}

// P1 nodal gradients on a cell (constant)
inline std::array<Vec2, 3> p1_gradients(const TriMesh& mesh, int cell) {
    const double inv2a = 1.0 / (2.0 * mesh.signed_cell_area(cell));
    std::array<Vec2, 3> g;
    for (int k = 0; k < 3; ++k) {
        const Vec2 d = mesh.vertices[mesh.cells[cell][(k + 2) % 3]] -
                       mesh.vertices[mesh.cells[cell][(k + 1) % 3]];
        g[k] = inv2a * Vec2{-d.y, d.x};
    }
    return g;
}

} // namespace detail

/// Stress-space bilinear form (T(phi_j), phi_i) for a pointwise tensor map
/// T, which must be self-adjoint with respect to the Frobenius product; the
/// local blocks are mirrored so the assembled matrix is symmetric to the bit.
template <class PointOp>
CsrMatrix assemble_stress_form(const TriMesh& mesh, const StressBasisTable& basis,
                               const PointOp& op, const TriQuadRule& rule = tri_rule_degree4()) {
    const int ndof = 4 * mesh.num_edges();
    TripletBuilder tb(ndof, ndof);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        double local[12][12] = {};
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 p = bary_point(mesh, c, rule.bary[q]);
            const double w = rule.weights[q] * area;
            Mat2 val[12], tval[12];
            for (int l = 0; l < 12; ++l) {
                val[l] = basis.eval_matrix(c, l / 6, l % 6, p);
                tval[l] = op(val[l], p);
            }
            for (int j = 0; j < 12; ++j)
                for (int i = 0; i <= j; ++i) local[i][j] += w * ddot(tval[j], val[i]);
        }
        for (int i = 0; i < 12; ++i)
            for (int j = i; j < 12; ++j) {
                const int gi = detail::stress_global_dof(mesh, c, i);
                const int gj = detail::stress_global_dof(mesh, c, j);
                tb.add(gi, gj, local[i][j]);
                if (i != j) tb.add(gj, gi, local[i][j]);
            }
    }
    return tb.compress();
}

inline CsrMatrix assemble_stress_mass(const TriMesh& mesh, const StressBasisTable& basis,
                                      const TriQuadRule& rule = tri_rule_degree4()) {
    return assemble_stress_form(mesh, basis, [](const Mat2& m, Vec2) { return m; }, rule);
}

/// (A phi_j, phi_i); symmetric positive definite for finite lambda.
inline CsrMatrix assemble_A(const TriMesh& mesh, const StressBasisTable& basis,
                            const ParameterSet& params,
                            const TriQuadRule& rule = tri_rule_degree4()) {
    return assemble_stress_form(
        mesh, basis, [&](const Mat2& m, Vec2) { return apply_A_pointwise(m, params); }, rule);
}

/// (div phi_j, div phi_i); the row-wise divergences are constant per cell.
inline CsrMatrix assemble_divdiv(const TriMesh& mesh, const StressBasisTable& basis) {
    const int ndof = 4 * mesh.num_edges();
    TripletBuilder tb(ndof, ndof);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        const auto& div = basis.cell[c].div;
        for (int r = 0; r < 2; ++r)
            for (int si = 0; si < 6; ++si)
                for (int sj = 0; sj < 6; ++sj)
                    tb.add(detail::stress_global_dof(mesh, c, 6 * r + si),
                           detail::stress_global_dof(mesh, c, 6 * r + sj),
                           area * div[si] * div[sj]);
    }
    return tb.compress();
}

/// Weighted H(div) inner-product matrix of the stress space:
/// (1/2mu)(phi_j, phi_i) + (div phi_j, div phi_i). Independent of lambda.
inline CsrMatrix assemble_sigma_riesz(const TriMesh& mesh, const StressBasisTable& basis,
                                      const ParameterSet& params) {
    return csr_add(assemble_stress_mass(mesh, basis), 1.0 / (2.0 * params.mu),
                   assemble_divdiv(mesh, basis), 1.0);
}

/// Pressure-stress coupling (K phi_j, psi_q) = alpha/(2mu+n lambda) (tr phi_j, psi_q).
inline CsrMatrix assemble_bulk_coupling(const TriMesh& mesh, const StressBasisTable& basis,
                                        const ParameterSet& params,
                                        const TriQuadRule& rule = tri_rule_degree4()) {
    const int nsigma = 4 * mesh.num_edges();
    const int np = mesh.num_vertices();
    const double coef = params.alpha / params.trace_denom();
    TripletBuilder tb(np, nsigma);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 p = bary_point(mesh, c, rule.bary[q]);
            const double w = rule.weights[q] * area;
            for (int l = 0; l < 12; ++l) {
                const Vec2 v = basis.cell[c].eval(l % 6, p);
                const double tr = (l / 6 == 0) ? v.x : v.y;
                const int j = detail::stress_global_dof(mesh, c, l);
                for (int k = 0; k < 3; ++k)
                    tb.add(mesh.cells[c][k], j, coef * w * tr * rule.bary[q][k]);
            }
        }
    }
    return tb.compress();
}

/// Pressure block (C psi_j, psi_i) + (kappa grad psi_j, grad psi_i), with the
/// nullspace pin (and any essential pressure dofs) eliminated symmetrically.
inline CsrMatrix assemble_pressure_block(const TriMesh& mesh, const DofMap& pressure_dm,
                                         const ParameterSet& params,
                                         const TriQuadRule& rule = tri_rule_degree4()) {
    const int np = mesh.num_vertices();
    const double c0 = params.storage_coeff();
    TripletBuilder tb(np, np);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        const auto grad = detail::p1_gradients(mesh, c);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 p = bary_point(mesh, c, rule.bary[q]);
            const double w = rule.weights[q] * area;
            const double kap = params.kappa(p);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    tb.add(mesh.cells[c][i], mesh.cells[c][j],
                           w * (c0 * (rule.bary[q][i] * rule.bary[q][j]) +
                                kap * dot(grad[i], grad[j])));
        }
    }
    CsrMatrix m = tb.compress();
    std::vector<uint8_t> mask = pressure_dm.constrained;
    if (pressure_dm.pinned_dof) mask[*pressure_dm.pinned_dof] = 1;
    apply_constraints(m, mask);
    return m;
}

/// (div phi_j, v_i) with v the piecewise-constant vector basis; exact.
inline CsrMatrix assemble_div(const TriMesh& mesh, const StressBasisTable& basis) {
    const int nsigma = 4 * mesh.num_edges();
    const int nu = 2 * mesh.num_cells();
    TripletBuilder tb(nu, nsigma);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        for (int l = 0; l < 12; ++l) {
            const int row = l / 6;  // row-wise divergence lands in component `row`
            tb.add(2 * c + row, detail::stress_global_dof(mesh, c, l),
                   area * basis.cell[c].div[l % 6]);
        }
    }
    return tb.compress();
}

/// (phi_j, eta_i) with eta the per-cell skew basis [[0,1],[-1,0]].
inline CsrMatrix assemble_skw(const TriMesh& mesh, const StressBasisTable& basis,
                              const TriQuadRule& rule = tri_rule_degree4()) {
    const int nsigma = 4 * mesh.num_edges();
    const int ngamma = mesh.num_cells();
    TripletBuilder tb(ngamma, nsigma);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 p = bary_point(mesh, c, rule.bary[q]);
            const double w = rule.weights[q] * area;
            for (int l = 0; l < 12; ++l) {
                const Vec2 v = basis.cell[c].eval(l % 6, p);
                const double val = (l / 6 == 0) ? v.y : -v.x;
                tb.add(c, detail::stress_global_dof(mesh, c, l), w * val);
            }
        }
    }
    return tb.compress();
}

inline double domain_area(const TriMesh& mesh) {
    double a = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) a += mesh.signed_cell_area(c);
    return a;
}

/// m_i = (1/sqrt(n |Omega|)) integral of tr(phi_i).
inline Vector assemble_m_vector(const TriMesh& mesh, const StressBasisTable& basis,
                                const TriQuadRule& rule = tri_rule_degree4()) {
    const double scale = 1.0 / std::sqrt(ParameterSet::dim * domain_area(mesh));
    Vector m(4 * mesh.num_edges(), 0.0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double area = mesh.cell_area(c);
        for (int q = 0; q < rule.size(); ++q) {
            const Vec2 p = bary_point(mesh, c, rule.bary[q]);
            const double w = rule.weights[q] * area;
            for (int l = 0; l < 12; ++l) {
                const Vec2 v = basis.cell[c].eval(l % 6, p);
                m[detail::stress_global_dof(mesh, c, l)] +=
                    scale * w * ((l / 6 == 0) ? v.x : v.y);
            }
        }
    }
    return m;
}

/// Mass matrices of the piecewise-constant spaces are diagonal.
inline Vector displacement_mass_diag(const TriMesh& mesh) {
    Vector d(2 * mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c)
        d[2 * c] = d[2 * c + 1] = mesh.cell_area(c);
    return d;
}

/// The skew basis [[0,1],[-1,0]] has Frobenius norm squared 2 per unit area.
inline Vector rotation_mass_diag(const TriMesh& mesh) {
    Vector d(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c) d[c] = 2.0 * mesh.cell_area(c);
    return d;
}

// ---------------------------------------------------------------------------
// Coupled systems
// ---------------------------------------------------------------------------

struct BlockDims {
    int nsigma = 0, np = 0, nu = 0, ngamma = 0;

    int offset_sigma() const { return 0; }
    int offset_p() const { return nsigma; }
    int offset_u() const { return nsigma + np; }
    int offset_gamma() const { return nsigma + np + nu; }
    int total() const { return nsigma + np + nu + ngamma; }
};

struct FourFieldSpaces {
    DofMap stress, pressure, displacement, rotation;
};

inline FourFieldSpaces build_all_spaces(const TriMesh& mesh, const BoundaryTags& tags) {
    return {build_space(mesh, tags, SpaceKind::stress),
            build_space(mesh, tags, SpaceKind::pressure),
            build_space(mesh, tags, SpaceKind::displacement),
            build_space(mesh, tags, SpaceKind::rotation)};
}

/// Assembled saddle-point system in the ordering (sigma, p, u, gamma). When
/// built without the pressure field (pure elasticity) np is zero and the
/// pressure members stay empty.
struct BlockSystem {
    BlockDims dims;
    CsrMatrix a_sigma;    // constrained
    CsrMatrix bulk;       // np x nsigma, raw
    CsrMatrix div_block;  // nu x nsigma, raw
    CsrMatrix skw_block;  // ngamma x nsigma, raw
    CsrMatrix pressure;   // pinned
    Vector mass_u_diag, mass_gamma_diag;
    CsrMatrix full;                     // symmetric coupled operator, constrained
    std::vector<uint8_t> constrained;   // global mask (stress constraints + pressure pin)
    Vector rhs;                         // (0, g, -f, 0), masked entries zeroed
};

namespace detail {

inline void add_block(TripletBuilder& tb, const CsrMatrix& m, int roff, int coff,
                      bool with_transpose) {
    for (int i = 0; i < m.nrows; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            tb.add(roff + i, coff + m.col_idx[k], m.values[k]);
            if (with_transpose) tb.add(coff + m.col_idx[k], roff + i, m.values[k]);
        }
}

} // namespace detail

inline BlockSystem assemble_system(const TriMesh& mesh, const StressBasisTable& basis,
                                   const FourFieldSpaces& spaces, const ParameterSet& params,
                                   bool include_pressure = true) {
    BlockSystem sys;
    sys.dims.nsigma = spaces.stress.ndof;
    sys.dims.np = include_pressure ? spaces.pressure.ndof : 0;
    sys.dims.nu = spaces.displacement.ndof;
    sys.dims.ngamma = spaces.rotation.ndof;
    check_arg(sys.dims.nsigma == 4 * mesh.num_edges() &&
                  sys.dims.nu == 2 * mesh.num_cells() &&
                  sys.dims.ngamma == mesh.num_cells(),
              "assemble_system: dof maps do not match the mesh");

    sys.a_sigma = assemble_A(mesh, basis, params);
    sys.div_block = assemble_div(mesh, basis);
    sys.skw_block = assemble_skw(mesh, basis);
    sys.mass_u_diag = displacement_mass_diag(mesh);
    sys.mass_gamma_diag = rotation_mass_diag(mesh);
    if (include_pressure) {
        sys.bulk = assemble_bulk_coupling(mesh, basis, params);
        sys.pressure = assemble_pressure_block(mesh, spaces.pressure, params);
    }

    const int n = sys.dims.total();
    sys.constrained.assign(n, 0);
    for (int i = 0; i < sys.dims.nsigma; ++i)
        sys.constrained[i] = spaces.stress.constrained[i];
    if (include_pressure && spaces.pressure.pinned_dof)
        sys.constrained[sys.dims.offset_p() + *spaces.pressure.pinned_dof] = 1;

    TripletBuilder tb(n, n);
    detail::add_block(tb, sys.a_sigma, 0, 0, false);
    detail::add_block(tb, sys.div_block, sys.dims.offset_u(), 0, true);
    detail::add_block(tb, sys.skw_block, sys.dims.offset_gamma(), 0, true);
    if (include_pressure) {
        detail::add_block(tb, sys.bulk, sys.dims.offset_p(), 0, true);
        // raw pressure block; the global constraint pass pins it below
        CsrMatrix raw = assemble_pressure_block(
            mesh, DofMap{SpaceKind::pressure, spaces.pressure.ndof,
                         std::vector<uint8_t>(spaces.pressure.ndof, 0), std::nullopt},
            params);
        detail::add_block(tb, raw, sys.dims.offset_p(), sys.dims.offset_p(), false);
    }
    for (int i = 0; i < n; ++i) tb.add(i, i, 0.0);  // keep every diagonal in the pattern
    sys.full = tb.compress();
    apply_constraints(sys.full, sys.constrained);

    apply_constraints(sys.a_sigma, spaces.stress.constrained);
    sys.rhs.assign(n, 0.0);
    return sys;
}

/// rhs = (0, g, -f, 0); entries at constrained dofs are zeroed.
inline void set_rhs(BlockSystem& sys, const Vector& g, const Vector& f) {
    check_arg(static_cast<int>(g.size()) == sys.dims.np, "set_rhs: g size");
    check_arg(static_cast<int>(f.size()) == sys.dims.nu, "set_rhs: f size");
    sys.rhs.assign(sys.dims.total(), 0.0);
    for (int i = 0; i < sys.dims.np; ++i) sys.rhs[sys.dims.offset_p() + i] = g[i];
    for (int i = 0; i < sys.dims.nu; ++i) sys.rhs[sys.dims.offset_u() + i] = -f[i];
    for (int i = 0; i < sys.dims.total(); ++i)
        if (sys.constrained[i]) sys.rhs[i] = 0.0;
}

} // namespace biotmix
