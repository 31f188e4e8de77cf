#pragma once

#include <limits>
#include <queue>

#include "biotmix/sparse.hpp"

namespace biotmix {

/// Reverse Cuthill-McKee ordering of the (symmetric) sparsity pattern.
/// Returns perm with perm[k] = original index placed at position k.
inline std::vector<int> rcm_ordering(const CsrMatrix& m) {
    check_arg(m.nrows == m.ncols, "rcm_ordering: square matrix required");
    const int n = m.nrows;
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            const int j = m.col_idx[k];
            if (j != i) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    auto degree = [&](int v) { return static_cast<int>(adj[v].size()); };

    // BFS returning the level structure rooted at s, restricted to unvisited nodes
    auto bfs_levels = [&](int s, const std::vector<uint8_t>& visited) {
        std::vector<std::vector<int>> levels;
        std::vector<uint8_t> seen = visited;
        levels.push_back({s});
        seen[s] = 1;
        while (true) {
            std::vector<int> next;
            for (int v : levels.back())
                for (int w : adj[v])
                    if (!seen[w]) {
                        seen[w] = 1;
                        next.push_back(w);
                    }
            if (next.empty()) break;
            levels.push_back(std::move(next));
        }
        return levels;
    };

    std::vector<int> order;
    order.reserve(n);
    std::vector<uint8_t> visited(n, 0);
    for (int seed = 0; seed < n; ++seed) {
        if (visited[seed]) continue;
        // pseudo-peripheral start (George-Liu)
        int root = seed;
        auto levels = bfs_levels(root, visited);
        for (int pass = 0; pass < 8; ++pass) {
            const auto& last = levels.back();
            int cand = *std::min_element(last.begin(), last.end(), [&](int a, int b) {
                return degree(a) < degree(b);
            });
            auto cand_levels = bfs_levels(cand, visited);
            if (cand_levels.size() > levels.size()) {
                root = cand;
                levels = std::move(cand_levels);
            } else {
                break;
            }
        }
        // Cuthill-McKee from root
        std::queue<int> q;
        q.push(root);
        visited[root] = 1;
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            order.push_back(v);
            std::vector<int> nbs;
            for (int w : adj[v])
                if (!visited[w]) nbs.push_back(w);
            std::sort(nbs.begin(), nbs.end(),
                      [&](int a, int b) { return degree(a) < degree(b); });
            for (int w : nbs) {
                visited[w] = 1;
                q.push(w);
            }
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

/// Envelope LDL^T factorization of an SPD matrix after RCM reordering.
/// Keeps a copy of the input for one step of iterative refinement in solve;
/// the refinement matters when the solve feeds large multipliers downstream
/// (rank-one corrected preconditioner at extreme lambda).
struct SymFactor {
    int n = 0;
    std::vector<int> perm;    // position -> original index
    std::vector<int> iperm;   // original index -> position
    std::vector<int> first;   // envelope start column per permuted row
    std::vector<std::size_t> offset;
    std::vector<double> env;  // strictly lower envelope, row segments
    std::vector<double> diag;
    CsrMatrix original;
};

inline SymFactor ldlt_factor(const CsrMatrix& m) {
    check_arg(m.nrows == m.ncols, "ldlt_factor: square matrix required");
    const int n = m.nrows;
    SymFactor f;
    f.n = n;
    f.original = m;
    f.perm = rcm_ordering(m);
    f.iperm.assign(n, 0);
    for (int k = 0; k < n; ++k) f.iperm[f.perm[k]] = k;

    f.first.assign(n, 0);
    for (int i = 0; i < n; ++i) f.first[i] = i;
    for (int i = 0; i < n; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            const int pi = f.iperm[i];
            const int pj = f.iperm[m.col_idx[k]];
            const int lo = std::min(pi, pj);
            const int hi = std::max(pi, pj);
            f.first[hi] = std::min(f.first[hi], lo);
        }
    f.offset.assign(n + 1, 0);
    for (int i = 0; i < n; ++i)
        f.offset[i + 1] = f.offset[i] + static_cast<std::size_t>(i - f.first[i]);
    f.env.assign(f.offset[n], 0.0);
    f.diag.assign(n, 0.0);

    for (int i = 0; i < n; ++i) {
        const int oi = f.perm[i];
        for (int k = m.row_ptr[oi]; k < m.row_ptr[oi + 1]; ++k) {
            const int pj = f.iperm[m.col_idx[k]];
            if (pj == i) f.diag[i] = m.values[k];
            else if (pj < i) f.env[f.offset[i] + (pj - f.first[i])] = m.values[k];
        }
    }

    // in-place factorization, row by row
    for (int i = 0; i < n; ++i) {
        double* row_i = f.env.data() + f.offset[i];
        const int fi = f.first[i];
        for (int j = fi; j < i; ++j) {
            const double* row_j = f.env.data() + f.offset[j];
            const int fj = f.first[j];
            const int k0 = std::max(fi, fj);
            double s = row_i[j - fi];
            for (int k = k0; k < j; ++k)
                s -= row_i[k - fi] * f.diag[k] * row_j[k - fj];
            row_i[j - fi] = s / f.diag[j];
        }
        double d = f.diag[i];
        for (int k = fi; k < i; ++k) d -= row_i[k - fi] * row_i[k - fi] * f.diag[k];
        check_state(d > 0.0, "ldlt_factor: matrix not SPD (non-positive pivot)");
        f.diag[i] = d;
    }
    return f;
}

/// Plain factor solve, no refinement.
inline Vector ldlt_solve_basic(const SymFactor& f, const Vector& b) {
    check_arg(static_cast<int>(b.size()) == f.n, "ldlt_solve: rhs size mismatch");
    const int n = f.n;
    Vector z(n);
    for (int i = 0; i < n; ++i) {
        const double* row_i = f.env.data() + f.offset[i];
        const int fi = f.first[i];
        double s = b[f.perm[i]];
        for (int k = fi; k < i; ++k) s -= row_i[k - fi] * z[k];
        z[i] = s;
    }
    for (int i = 0; i < n; ++i) z[i] /= f.diag[i];
    for (int i = n - 1; i >= 0; --i) {
        const double* row_i = f.env.data() + f.offset[i];
        const int fi = f.first[i];
        const double zi = z[i];
        for (int k = fi; k < i; ++k) z[k] -= row_i[k - fi] * zi;
    }
    Vector x(n);
    for (int i = 0; i < n; ++i) x[f.perm[i]] = z[i];
    return x;
}

inline Vector ldlt_solve(const SymFactor& f, const Vector& b) {
    Vector x = ldlt_solve_basic(f, b);
    Vector r(b);
    spmv_add(f.original, x, -1.0, r);
    Vector dx = ldlt_solve_basic(f, r);
    axpy(1.0, dx, x);
    return x;
}

} // namespace biotmix
