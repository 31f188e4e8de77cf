#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "biotmix/core.hpp"

namespace biotmix {

/// Compressed sparse row matrix with sorted, unique column indices per row.
struct CsrMatrix {
    int nrows = 0;
    int ncols = 0;
    std::vector<int> row_ptr;   // size nrows + 1
    std::vector<int> col_idx;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(col_idx.size()); }

    double entry(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col_idx[k] == j) return values[k];
        return 0.0;
    }
};

/// Accumulates (i, j, value) triplets and compresses duplicates into CSR.
class TripletBuilder {
public:
    TripletBuilder(int nrows, int ncols) : nrows_(nrows), ncols_(ncols) {}

    void add(int i, int j, double v) {
        check_arg(i >= 0 && i < nrows_ && j >= 0 && j < ncols_, "triplet out of range");
        entries_.emplace_back(i, j, v);
    }

    CsrMatrix compress() const {
        std::vector<std::tuple<int, int, double>> sorted = entries_;
        // stable, so duplicate entries accumulate in insertion order and
        // mirrored pairs of a symmetric assembly sum to bitwise-equal values
        std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) <
                   std::tie(std::get<0>(b), std::get<1>(b));
        });
        CsrMatrix m;
        m.nrows = nrows_;
        m.ncols = ncols_;
        m.row_ptr.assign(nrows_ + 1, 0);
        std::size_t k = 0;
        while (k < sorted.size()) {
            const int i = std::get<0>(sorted[k]);
            const int j = std::get<1>(sorted[k]);
            double v = 0.0;
            while (k < sorted.size() && std::get<0>(sorted[k]) == i &&
                   std::get<1>(sorted[k]) == j) {
                v += std::get<2>(sorted[k]);
                ++k;
            }
            m.col_idx.push_back(j);
            m.values.push_back(v);
            ++m.row_ptr[i + 1];
        }
        for (int i = 0; i < nrows_; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
        return m;
    }

private:
    int nrows_, ncols_;
    std::vector<std::tuple<int, int, double>> entries_;
};

inline Vector spmv(const CsrMatrix& m, const Vector& x) {
    check_arg(static_cast<int>(x.size()) == m.ncols, "spmv: dimension mismatch");
    Vector y(m.nrows, 0.0);
    for (int i = 0; i < m.nrows; ++i) {
        double s = 0.0;
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            s += m.values[k] * x[m.col_idx[k]];
        y[i] = s;
    }
    return y;
}

/// y += alpha * M x
inline void spmv_add(const CsrMatrix& m, const Vector& x, double alpha, Vector& y) {
    check_arg(static_cast<int>(x.size()) == m.ncols, "spmv_add: dimension mismatch");
    check_arg(static_cast<int>(y.size()) == m.nrows, "spmv_add: dimension mismatch");
    for (int i = 0; i < m.nrows; ++i) {
        double s = 0.0;
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            s += m.values[k] * x[m.col_idx[k]];
        y[i] += alpha * s;
    }
}

/// y += alpha * M^T x
inline void spmv_transpose_add(const CsrMatrix& m, const Vector& x, double alpha, Vector& y) {
    check_arg(static_cast<int>(x.size()) == m.nrows, "spmv_transpose_add: dimension mismatch");
    check_arg(static_cast<int>(y.size()) == m.ncols, "spmv_transpose_add: dimension mismatch");
    for (int i = 0; i < m.nrows; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            y[m.col_idx[k]] += alpha * m.values[k] * x[i];
}

inline CsrMatrix csr_add(const CsrMatrix& a, double ca, const CsrMatrix& b, double cb) {
    check_arg(a.nrows == b.nrows && a.ncols == b.ncols, "csr_add: shape mismatch");
    TripletBuilder tb(a.nrows, a.ncols);
    for (int i = 0; i < a.nrows; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            tb.add(i, a.col_idx[k], ca * a.values[k]);
    for (int i = 0; i < b.nrows; ++i)
        for (int k = b.row_ptr[i]; k < b.row_ptr[i + 1]; ++k)
            tb.add(i, b.col_idx[k], cb * b.values[k]);
    return tb.compress();
}

inline CsrMatrix csr_transpose(const CsrMatrix& a) {
    TripletBuilder tb(a.ncols, a.nrows);
    for (int i = 0; i < a.nrows; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            tb.add(a.col_idx[k], i, a.values[k]);
    return tb.compress();
}

inline double max_asymmetry(const CsrMatrix& a) {
    check_arg(a.nrows == a.ncols, "max_asymmetry: square matrix required");
    double worst = 0.0;
    for (int i = 0; i < a.nrows; ++i)
        for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            worst = std::max(worst, std::abs(a.values[k] - a.entry(a.col_idx[k], i)));
    return worst;
}

/// Symmetric elimination of constrained rows/columns: zero them and put a
/// unit value on the diagonal. The pattern must already contain the diagonal
/// of every constrained row.
inline void apply_constraints(CsrMatrix& m, const std::vector<uint8_t>& mask) {
    check_arg(m.nrows == m.ncols, "apply_constraints: square matrix required");
    check_arg(static_cast<int>(mask.size()) == m.nrows, "apply_constraints: mask size");
    for (int i = 0; i < m.nrows; ++i) {
        bool diag_seen = false;
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            const int j = m.col_idx[k];
            if (mask[i] || mask[j]) m.values[k] = (i == j) ? 1.0 : 0.0;
            if (i == j) diag_seen = true;
        }
        if (mask[i]) check_state(diag_seen, "apply_constraints: missing diagonal entry");
    }
}

// ---------------------------------------------------------------------------
// Matrix Market I/O (coordinate, real, general or symmetric)
// ---------------------------------------------------------------------------

inline void write_matrix_market(const CsrMatrix& m, std::ostream& os, bool symmetric = false) {
    os << "%%MatrixMarket matrix coordinate real "
       << (symmetric ? "symmetric" : "general") << "\n";
    int count = 0;
    for (int i = 0; i < m.nrows; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            if (!symmetric || m.col_idx[k] <= i) ++count;
    os << m.nrows << " " << m.ncols << " " << count << "\n";
    char buf[64];
    for (int i = 0; i < m.nrows; ++i) {
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) {
            const int j = m.col_idx[k];
            if (symmetric && j > i) continue;
            std::snprintf(buf, sizeof(buf), "%d %d %.16e\n", i + 1, j + 1, m.values[k]);
            os << buf;
        }
    }
}

inline void write_matrix_market(const CsrMatrix& m, const std::string& path,
                                bool symmetric = false) {
    std::ofstream os(path);
    check_state(os.good(), "cannot open " + path + " for writing");
    write_matrix_market(m, os, symmetric);
}

inline CsrMatrix read_matrix_market(std::istream& is) {
    std::string line;
    check_state(static_cast<bool>(std::getline(is, line)), "matrix market: empty stream");
    check_state(line.rfind("%%MatrixMarket", 0) == 0, "matrix market: bad header");
    const bool symmetric = line.find("symmetric") != std::string::npos;
    check_state(line.find("coordinate") != std::string::npos, "matrix market: need coordinate");
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream dims(line);
    int nrows = 0, ncols = 0, nnz = 0;
    dims >> nrows >> ncols >> nnz;
    check_state(nrows > 0 && ncols > 0, "matrix market: bad dimensions");
    TripletBuilder tb(nrows, ncols);
    for (int k = 0; k < nnz; ++k) {
        check_state(static_cast<bool>(std::getline(is, line)), "matrix market: truncated");
        std::istringstream entry(line);
        int i = 0, j = 0;
        double v = 0.0;
        entry >> i >> j >> v;
        tb.add(i - 1, j - 1, v);
        if (symmetric && i != j) tb.add(j - 1, i - 1, v);
    }
    return tb.compress();
}

inline CsrMatrix read_matrix_market(const std::string& path) {
    std::ifstream is(path);
    check_state(is.good(), "cannot open " + path);
    return read_matrix_market(is);
}

} // namespace biotmix
