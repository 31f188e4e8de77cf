#pragma once

#include <algorithm>

#include "biotmix/sparse.hpp"

namespace biotmix {

/// Row-major dense matrix for the small verification problems.
struct DenseMatrix {
    int nrows = 0;
    int ncols = 0;
    std::vector<double> a;

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : nrows(r), ncols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * ncols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * ncols + j]; }

    static DenseMatrix identity(int n) {
        DenseMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

inline DenseMatrix to_dense(const CsrMatrix& s) {
    DenseMatrix d(s.nrows, s.ncols);
    for (int i = 0; i < s.nrows; ++i)
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k)
            d(i, s.col_idx[k]) = s.values[k];
    return d;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    check_arg(a.ncols == b.nrows, "matmul: shape mismatch");
    DenseMatrix c(a.nrows, b.ncols);
    for (int i = 0; i < a.nrows; ++i)
        for (int k = 0; k < a.ncols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.ncols; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.ncols, a.nrows);
    for (int i = 0; i < a.nrows; ++i)
        for (int j = 0; j < a.ncols; ++j) t(j, i) = a(i, j);
    return t;
}

inline Vector matvec(const DenseMatrix& a, const Vector& x) {
    check_arg(static_cast<int>(x.size()) == a.ncols, "matvec: shape mismatch");
    Vector y(a.nrows, 0.0);
    for (int i = 0; i < a.nrows; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.ncols; ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.a) s += v * v;
    return std::sqrt(s);
}

/// In-place Cholesky A = L L^T, lower triangle. Throws if A is not SPD.
inline DenseMatrix cholesky(const DenseMatrix& a) {
    check_arg(a.nrows == a.ncols, "cholesky: square matrix required");
    const int n = a.nrows;
    DenseMatrix l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                check_state(s > 0.0, "cholesky: matrix not SPD");
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

inline Vector forward_subst(const DenseMatrix& l, const Vector& b) {
    const int n = l.nrows;
    Vector x(b);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
        x[i] /= l(i, i);
    }
    return x;
}

inline Vector backward_subst_transposed(const DenseMatrix& l, const Vector& b) {
    const int n = l.nrows;
    Vector x(b);
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) x[i] -= l(k, i) * x[k];
        x[i] /= l(i, i);
    }
    return x;
}

inline Vector cholesky_solve(const DenseMatrix& l, const Vector& b) {
    return backward_subst_transposed(l, forward_subst(l, b));
}

/// Determinant via LU with partial pivoting; used as an independent oracle.
inline double lu_determinant(DenseMatrix a) {
    check_arg(a.nrows == a.ncols, "lu_determinant: square matrix required");
    const int n = a.nrows;
    double det = 1.0;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

/// Dense solve via LU with partial pivoting (general square systems).
inline Vector lu_solve(DenseMatrix a, Vector b) {
    check_arg(a.nrows == a.ncols, "lu_solve: square matrix required");
    check_arg(static_cast<int>(b.size()) == a.nrows, "lu_solve: rhs size");
    const int n = a.nrows;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        check_state(a(piv, k) != 0.0, "lu_solve: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[i] -= a(i, j) * b[j];
        b[i] /= a(i, i);
    }
    return b;
}

/// Cyclic Jacobi eigensolver for symmetric matrices. Returns eigenvalues in
/// ascending order; if `vectors` is non-null it receives the corresponding
/// orthonormal eigenvectors as columns.
inline Vector jacobi_eigenvalues(DenseMatrix a, DenseMatrix* vectors = nullptr,
                                 int max_sweeps = 60) {
    check_arg(a.nrows == a.ncols, "jacobi: square matrix required");
    const int n = a.nrows;
    DenseMatrix v = DenseMatrix::identity(n);
    double base = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) base = std::max(base, std::abs(a(i, j)));
    if (base == 0.0) base = 1.0;
    const double stop = 1e-15 * base;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= stop * 1e-2) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return a(i, i) < a(j, j); });
    Vector eig(n);
    for (int i = 0; i < n; ++i) eig[i] = a(order[i], order[i]);
    if (vectors) {
        *vectors = DenseMatrix(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) (*vectors)(i, j) = v(i, order[j]);
    }
    return eig;
}

/// Generalized symmetric eigenvalues of A x = lambda B x with B SPD, via
/// Cholesky reduction to the standard problem.
inline Vector dense_sym_geig(const DenseMatrix& a, const DenseMatrix& b,
                             DenseMatrix* vectors = nullptr) {
    check_arg(a.nrows == a.ncols && b.nrows == b.ncols && a.nrows == b.nrows,
              "dense_sym_geig: shape mismatch");
    const int n = a.nrows;
    const DenseMatrix l = cholesky(b);
    // C = L^{-1} A L^{-T}, built column by column
    DenseMatrix c(n, n);
    for (int j = 0; j < n; ++j) {
        Vector col(n);
        for (int i = 0; i < n; ++i) col[i] = a(i, j);
        col = forward_subst(l, col);
        for (int i = 0; i < n; ++i) c(i, j) = col[i];
    }
    DenseMatrix ct = transpose(c);
    for (int j = 0; j < n; ++j) {
        Vector col(n);
        for (int i = 0; i < n; ++i) col[i] = ct(i, j);
        col = forward_subst(l, col);
        for (int i = 0; i < n; ++i) c(j, i) = col[i];
    }
    // symmetrize against roundoff
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double m = 0.5 * (c(i, j) + c(j, i));
            c(i, j) = m;
            c(j, i) = m;
        }
    DenseMatrix u;
    Vector eig = jacobi_eigenvalues(c, vectors ? &u : nullptr);
    if (vectors) {
        // map eigenvectors back: x = L^{-T} u
        *vectors = DenseMatrix(n, n);
        for (int j = 0; j < n; ++j) {
            Vector col(n);
            for (int i = 0; i < n; ++i) col[i] = u(i, j);
            col = backward_subst_transposed(l, col);
            for (int i = 0; i < n; ++i) (*vectors)(i, j) = col[i];
        }
    }
    return eig;
}

} // namespace biotmix
