#pragma once

#include <optional>

#include "biotmix/quadrature.hpp"

namespace biotmix {

enum class SpaceKind { stress, pressure, displacement, rotation };

/// Degrees of freedom of one discrete space:
///   stress        row-wise BDM1, 4 dofs per edge (2 rows x 2 normal moments)
///   pressure      continuous P1, one dof per vertex
///   displacement  piecewise-constant vectors, 2 dofs per cell
///   rotation      piecewise-constant skew tensors, 1 dof per cell (2D)
struct DofMap {
    SpaceKind kind = SpaceKind::stress;
    int ndof = 0;
    std::vector<uint8_t> constrained;  // essential BC mask
    std::optional<int> pinned_dof;     // pressure nullspace pin

    static int stress_dof(int edge, int row, int moment) {
        return 4 * edge + 2 * row + moment;
    }

    int entity_dof(int entity, int slot) const {
        switch (kind) {
            case SpaceKind::stress: return 4 * entity + slot;
            case SpaceKind::displacement: return 2 * entity + slot;
            default: return entity;
        }
    }

    int constrained_count() const {
        int c = 0;
        for (uint8_t b : constrained) c += b;
        return c;
    }
};

inline DofMap build_space(const TriMesh& mesh, const BoundaryTags& tags, SpaceKind kind) {
    DofMap dm;
    dm.kind = kind;
    switch (kind) {
        case SpaceKind::stress: {
            dm.ndof = 4 * mesh.num_edges();
            dm.constrained.assign(dm.ndof, 0);
            for (int e : tags.gamma_t)
                for (int slot = 0; slot < 4; ++slot) dm.constrained[4 * e + slot] = 1;
            break;
        }
        case SpaceKind::pressure: {
            dm.ndof = mesh.num_vertices();
            dm.constrained.assign(dm.ndof, 0);
            for (int e : tags.gamma_p) {
                dm.constrained[mesh.edges[e][0]] = 1;
                dm.constrained[mesh.edges[e][1]] = 1;
            }
            if (tags.gamma_p.empty()) dm.pinned_dof = 0;  // vertex (0,0)
            break;
        }
        case SpaceKind::displacement: {
            dm.ndof = 2 * mesh.num_cells();
            dm.constrained.assign(dm.ndof, 0);
            break;
        }
        case SpaceKind::rotation: {
            dm.ndof = mesh.num_cells();
            dm.constrained.assign(dm.ndof, 0);
            break;
        }
    }
    return dm;
}

/// BDM1 degrees of freedom of a vector field on one edge: moments of the
/// normal component against the Legendre polynomials 1 and s on [-1,1],
/// parameterized along the global edge orientation.
template <class Field>
std::array<double, 2> bdm1_edge_moments(const Field& field, const TriMesh& mesh, int edge) {
    check_arg(edge >= 0 && edge < mesh.num_edges(), "bdm1_edge_moments: edge out of range");
    const Vec2 a = mesh.vertices[mesh.edges[edge][0]];
    const Vec2 b = mesh.vertices[mesh.edges[edge][1]];
    const Vec2 nrm = edge_normal(mesh, edge);
    const double len = mesh.edge_length(edge);
    const GaussRule& g = gauss_rule(2);
    std::array<double, 2> m = {0.0, 0.0};
    for (std::size_t q = 0; q < g.points.size(); ++q) {
        const double t = g.points[q];
        const Vec2 p = a + t * (b - a);
        const double vn = dot(field(p), nrm);
        const double w = g.weights[q] * len;
        m[0] += w * vn;
        m[1] += w * vn * (2.0 * t - 1.0);
    }
    return m;
}

/// One cell's BDM1 basis: six P1 vector shapes, stored as monomial
/// coefficients v(x,y) = (c0 + c1 x + c2 y, c3 + c4 x + c5 y). Shape 2k+m is
/// dual to moment m on the edge opposite local vertex k.
struct CellStressBasis {
    std::array<std::array<double, 6>, 6> coeff;
    std::array<double, 6> div;  // constant per shape

    Vec2 eval(int shape, Vec2 p) const {
        const auto& c = coeff[shape];
        return {c[0] + c[1] * p.x + c[2] * p.y, c[3] + c[4] * p.x + c[5] * p.y};
    }
};

namespace detail {

// Solve the 6x6 unisolvence system: DOF functionals applied to the monomial
// basis, then invert. Partial pivoting is plenty at this size.
inline CellStressBasis build_cell_basis(const TriMesh& mesh, int cell) {
    auto monomial = [](int i, Vec2 p) -> Vec2 {
        switch (i) {
            case 0: return {1.0, 0.0};
            case 1: return {p.x, 0.0};
            case 2: return {p.y, 0.0};
            case 3: return {0.0, 1.0};
            case 4: return {0.0, p.x};
            default: return {0.0, p.y};
        }
    };
    double d[6][12];  // [functional][monomial | identity]
    for (int k = 0; k < 3; ++k) {
        const int e = mesh.cell_edges[cell][k];
        for (int i = 0; i < 6; ++i) {
            const auto m = bdm1_edge_moments([&](Vec2 p) { return monomial(i, p); }, mesh, e);
            d[2 * k][i] = m[0];
            d[2 * k + 1][i] = m[1];
        }
    }
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) d[r][6 + c] = (r == c) ? 1.0 : 0.0;

    for (int k = 0; k < 6; ++k) {
        int piv = k;
        for (int r = k + 1; r < 6; ++r)
            if (std::abs(d[r][k]) > std::abs(d[piv][k])) piv = r;
        check_state(d[piv][k] != 0.0, "BDM1 basis: singular DOF matrix");
        if (piv != k)
            for (int c = 0; c < 12; ++c) std::swap(d[k][c], d[piv][c]);
        const double inv = 1.0 / d[k][k];
        for (int c = k; c < 12; ++c) d[k][c] *= inv;
        for (int r = 0; r < 6; ++r) {
            if (r == k) continue;
            const double f = d[r][k];
            if (f == 0.0) continue;
            for (int c = k; c < 12; ++c) d[r][c] -= f * d[k][c];
        }
    }

    CellStressBasis basis;
    for (int s = 0; s < 6; ++s) {
        for (int i = 0; i < 6; ++i) basis.coeff[s][i] = d[i][6 + s];
        basis.div[s] = basis.coeff[s][1] + basis.coeff[s][5];
    }
    return basis;
}

} // namespace detail

/// Per-cell stress basis for the whole mesh. The matrix-valued shapes are the
/// 2 rows x 6 vector shapes; shape (row, 2k+m) carries global dof
/// 4*edge(k) + 2*row + m.
struct StressBasisTable {
    std::vector<CellStressBasis> cell;

    explicit StressBasisTable(const TriMesh& mesh) {
        cell.reserve(mesh.num_cells());
        for (int c = 0; c < mesh.num_cells(); ++c)
            cell.push_back(detail::build_cell_basis(mesh, c));
    }

    /// Matrix value of local matrix-shape (row r, vector shape s) at p.
    Mat2 eval_matrix(int c, int r, int s, Vec2 p) const {
        const Vec2 v = cell[c].eval(s, p);
        if (r == 0) return {v.x, v.y, 0.0, 0.0};
        return {0.0, 0.0, v.x, v.y};
    }
};

/// Coefficients of the identity tensor in the stress space: the edge moments
/// of each identity row. Exact, no linear solve involved. Only meaningful
/// when no normal-trace constraints are active (clamped configuration).
inline Vector interpolate_identity(const DofMap& stress_dofmap, const TriMesh& mesh) {
    check_arg(stress_dofmap.kind == SpaceKind::stress, "interpolate_identity: stress dofmap");
    check_state(stress_dofmap.constrained_count() == 0,
                "interpolate_identity: identity tensor violates normal-trace constraints");
    Vector w(stress_dofmap.ndof, 0.0);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Vec2 nrm = edge_normal(mesh, e);
        const double len = mesh.edge_length(e);
        w[DofMap::stress_dof(e, 0, 0)] = nrm.x * len;
        w[DofMap::stress_dof(e, 1, 0)] = nrm.y * len;
    }
    return w;
}

} // namespace biotmix
