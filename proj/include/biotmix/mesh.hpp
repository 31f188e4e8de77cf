#pragma once

#include <map>
#include <ostream>

#include "biotmix/core.hpp"

namespace biotmix {

/// Structured triangulation of the unit square. Each of the N x N squares is
/// split along its lower-left to upper-right diagonal; edges carry a global
/// orientation from the lower to the higher vertex index, so inter-element
/// normal traces differ only by the per-cell orientation sign.
struct TriMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> cells;           // CCW vertex triples
    std::vector<std::array<int, 2>> edges;           // low vertex index first
    std::vector<std::array<int, 3>> cell_edges;      // edge id opposite local vertex k
    std::vector<std::array<int, 3>> cell_edge_signs; // +1 when cell traversal matches global
    std::vector<std::array<int, 2>> edge_cells;      // adjacent cells, -1 when boundary
    std::vector<int> boundary_edges;                 // ascending edge ids
    int grid_n = 0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_cells() const { return static_cast<int>(cells.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    double signed_cell_area(int c) const {
        const Vec2 p0 = vertices[cells[c][0]];
        const Vec2 p1 = vertices[cells[c][1]];
        const Vec2 p2 = vertices[cells[c][2]];
        return 0.5 * cross(p1 - p0, p2 - p0);
    }
    double cell_area(int c) const { return std::abs(signed_cell_area(c)); }

    double edge_length(int e) const {
        return norm(vertices[edges[e][1]] - vertices[edges[e][0]]);
    }
    Vec2 edge_tangent(int e) const {
        const Vec2 t = vertices[edges[e][1]] - vertices[edges[e][0]];
        return (1.0 / norm(t)) * t;
    }
    Vec2 edge_midpoint(int e) const {
        return 0.5 * (vertices[edges[e][0]] + vertices[edges[e][1]]);
    }
    bool is_boundary_edge(int e) const { return edge_cells[e][1] < 0; }
};

/// Normal obtained by rotating the oriented tangent by -90 degrees.
inline Vec2 edge_normal(const TriMesh& mesh, int e) {
    check_arg(e >= 0 && e < mesh.num_edges(), "edge_normal: edge index out of range");
    const Vec2 t = mesh.edge_tangent(e);
    return {t.y, -t.x};
}

inline TriMesh build_unit_square_mesh(int n) {
    check_arg(n >= 1, "build_unit_square_mesh: N must be positive");
    TriMesh mesh;
    mesh.grid_n = n;
    const int np = n + 1;
    mesh.vertices.reserve(static_cast<std::size_t>(np) * np);
    for (int iy = 0; iy < np; ++iy)
        for (int ix = 0; ix < np; ++ix)
            mesh.vertices.push_back({double(ix) / n, double(iy) / n});

    auto vid = [np](int ix, int iy) { return iy * np + ix; };
    mesh.cells.reserve(static_cast<std::size_t>(2) * n * n);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const int v00 = vid(ix, iy);
            const int v10 = vid(ix + 1, iy);
            const int v01 = vid(ix, iy + 1);
            const int v11 = vid(ix + 1, iy + 1);
            mesh.cells.push_back({v00, v10, v11});
            mesh.cells.push_back({v00, v11, v01});
        }

    // collect unique edges; ordered map gives a deterministic numbering
    std::map<std::array<int, 2>, int> edge_id;
    for (const auto& cell : mesh.cells)
        for (int k = 0; k < 3; ++k) {
            const int a = cell[(k + 1) % 3];
            const int b = cell[(k + 2) % 3];
            edge_id.emplace(std::array<int, 2>{std::min(a, b), std::max(a, b)}, 0);
        }
    int next = 0;
    for (auto& [key, id] : edge_id) {
        id = next++;
        mesh.edges.push_back(key);
    }

    mesh.cell_edges.resize(mesh.num_cells());
    mesh.cell_edge_signs.resize(mesh.num_cells());
    mesh.edge_cells.assign(mesh.num_edges(), {-1, -1});
    for (int c = 0; c < mesh.num_cells(); ++c)
        for (int k = 0; k < 3; ++k) {
            const int a = mesh.cells[c][(k + 1) % 3];
            const int b = mesh.cells[c][(k + 2) % 3];
            const int e = edge_id.at({std::min(a, b), std::max(a, b)});
            mesh.cell_edges[c][k] = e;
            mesh.cell_edge_signs[c][k] = (a < b) ? 1 : -1;
            if (mesh.edge_cells[e][0] < 0) mesh.edge_cells[e][0] = c;
            else mesh.edge_cells[e][1] = c;
        }

    for (int e = 0; e < mesh.num_edges(); ++e)
        if (mesh.edge_cells[e][1] < 0) mesh.boundary_edges.push_back(e);
    return mesh;
}

enum class BcMode { clamped, mixed };

/// Two independent partitions of the boundary: pressure (gamma_p/gamma_f)
/// and displacement/traction (gamma_d/gamma_t). The pressure side is always
/// pure Neumann here (gamma_p empty), matching the experiment setup.
struct BoundaryTags {
    std::vector<int> gamma_p, gamma_f, gamma_d, gamma_t;
    BcMode mode = BcMode::clamped;

    bool clamped() const { return gamma_t.empty(); }
};

inline BoundaryTags classify_boundary(const TriMesh& mesh, BcMode mode) {
    BoundaryTags tags;
    tags.mode = mode;
    tags.gamma_f = mesh.boundary_edges;
    const double tol = 0.25 / std::max(mesh.grid_n, 1);
    for (int e : mesh.boundary_edges) {
        const bool on_top = mesh.vertices[mesh.edges[e][0]].y > 1.0 - tol &&
                            mesh.vertices[mesh.edges[e][1]].y > 1.0 - tol;
        if (mode == BcMode::mixed && on_top) tags.gamma_t.push_back(e);
        else tags.gamma_d.push_back(e);
    }
    return tags;
}

inline void dump_mesh_text(const TriMesh& mesh, std::ostream& os) {
    os << "vertices " << mesh.num_vertices() << "\n";
    char buf[96];
    for (const Vec2& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "%.16e %.16e\n", v.x, v.y);
        os << buf;
    }
    os << "cells " << mesh.num_cells() << "\n";
    for (const auto& c : mesh.cells)
        os << c[0] << " " << c[1] << " " << c[2] << "\n";
    os << "edges " << mesh.num_edges() << "\n";
    for (const auto& e : mesh.edges) os << e[0] << " " << e[1] << "\n";
}

} // namespace biotmix
