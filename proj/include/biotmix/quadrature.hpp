#pragma once

#include "biotmix/mesh.hpp"

namespace biotmix {

/// Triangle quadrature rule in barycentric coordinates; weights sum to one
/// and are scaled by the physical cell area on use.
struct TriQuadRule {
    std::vector<std::array<double, 3>> bary;
    std::vector<double> weights;

    int size() const { return static_cast<int>(weights.size()); }
};

/// 6-point rule, exact for polynomials of degree <= 4. This is the rule used
/// for all assembly (every integrand in the system has degree <= 2).
inline const TriQuadRule& tri_rule_degree4() {
    static const TriQuadRule rule = [] {
        TriQuadRule r;
        const double a1 = 0.816847572980459, b1 = 0.091576213509771;
        const double w1 = 0.109951743655322;
        const double a2 = 0.108103018168070, b2 = 0.445948490915965;
        const double w2 = 0.223381589678011;
        r.bary = {{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                  {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        r.weights = {w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

/// 7-point rule, exact for degree <= 5; used only to cross-check assembly.
inline const TriQuadRule& tri_rule_degree5() {
    static const TriQuadRule rule = [] {
        TriQuadRule r;
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double w1 = 0.132394152788506;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w2 = 0.125939180544827;
        r.bary = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                  {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                  {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        r.weights = {0.225, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

inline Vec2 bary_point(const TriMesh& mesh, int cell, const std::array<double, 3>& bary) {
    const Vec2 p0 = mesh.vertices[mesh.cells[cell][0]];
    const Vec2 p1 = mesh.vertices[mesh.cells[cell][1]];
    const Vec2 p2 = mesh.vertices[mesh.cells[cell][2]];
    return bary[0] * p0 + bary[1] * p1 + bary[2] * p2;
}

/// Gauss-Legendre rule on [0,1].
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;
};

inline const GaussRule& gauss_rule(int npoints) {
    static const GaussRule g2 = [] {
        GaussRule g;
        const double d = 0.5 / std::sqrt(3.0);
        g.points = {0.5 - d, 0.5 + d};
        g.weights = {0.5, 0.5};
        return g;
    }();
    static const GaussRule g3 = [] {
        GaussRule g;
        const double d = 0.5 * std::sqrt(0.6);
        g.points = {0.5 - d, 0.5, 0.5 + d};
        g.weights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        return g;
    }();
    check_arg(npoints == 2 || npoints == 3, "gauss_rule: only 2 or 3 points provided");
    return npoints == 2 ? g2 : g3;
}

} // namespace biotmix
