#include "sprint/matrix.hpp"

#include <cmath>
#include <cstring>

namespace sprint {

bool Matrix::all_finite() const {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
    if (A.cols != B.rows) throw DimensionError("matmul: inner dimensions differ");
    Matrix C(A.rows, B.cols);
    for (int i = 0; i < A.rows; ++i) {
        const double* __restrict__ arow = A.row(i);
        double* __restrict__ crow = C.row(i);
        for (int k = 0; k < A.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* __restrict__ brow = B.row(k);
            for (int j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    C.seq_lens = B.seq_lens;
    return C;
}

Matrix matmul_tn(const Matrix& A, const Matrix& B) {
    if (A.rows != B.rows) throw DimensionError("matmul_tn: inner dimensions differ");
    Matrix C(A.cols, B.cols);
    for (int k = 0; k < A.rows; ++k) {
        const double* __restrict__ arow = A.row(k);
        const double* __restrict__ brow = B.row(k);
        for (int i = 0; i < A.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* __restrict__ crow = C.row(i);
            for (int j = 0; j < B.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    C.seq_lens = B.seq_lens;
    return C;
}

Matrix gram(const Matrix& Z) {
    Matrix G(Z.rows, Z.rows);
    for (int i = 0; i < Z.rows; ++i) {
        const double* zi = Z.row(i);
        for (int j = 0; j <= i; ++j) {
            const double* zj = Z.row(j);
            double s = 0.0;
            for (int t = 0; t < Z.cols; ++t) s += zi[t] * zj[t];
            G.at(i, j) = s;
            G.at(j, i) = s;
        }
    }
    return G;
}

Matrix transpose(const Matrix& A) {
    Matrix T(A.cols, A.rows);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
    return T;
}

Matrix sub(const Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw DimensionError("sub: shapes differ");
    Matrix C(A.rows, A.cols);
    for (size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] - B.a[i];
    C.seq_lens = A.seq_lens;
    return C;
}

void add_inplace(Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw DimensionError("add_inplace: shapes differ");
    for (size_t i = 0; i < A.a.size(); ++i) A.a[i] += B.a[i];
}

double frob_norm(const Matrix& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

double frob_dist(const Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw DimensionError("frob_dist: shapes differ");
    double s = 0.0;
    for (size_t i = 0; i < A.a.size(); ++i) {
        const double d = A.a[i] - B.a[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double max_abs_diff(const Matrix& A, const Matrix& B) {
    if (!A.same_shape(B)) throw DimensionError("max_abs_diff: shapes differ");
    double m = 0.0;
    for (size_t i = 0; i < A.a.size(); ++i) m = std::max(m, std::abs(A.a[i] - B.a[i]));
    return m;
}

bool cholesky_factor(Matrix& G) {
    if (G.rows != G.cols) throw DimensionError("cholesky_factor: matrix not square");
    const int n = G.rows;
    for (int j = 0; j < n; ++j) {
        double d = G.at(j, j);
        for (int k = 0; k < j; ++k) d -= G.at(j, k) * G.at(j, k);
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        G.at(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double s = G.at(i, j);
            for (int k = 0; k < j; ++k) s -= G.at(i, k) * G.at(j, k);
            G.at(i, j) = s / ljj;
        }
    }
    // zero the strict upper triangle so the factor is self-describing
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) G.at(i, j) = 0.0;
    return true;
}

void cholesky_solve(const Matrix& L, std::span<double> b) {
    const int n = L.rows;
    if (static_cast<int>(b.size()) != n) throw DimensionError("cholesky_solve: rhs size");
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L.at(i, k) * b[k];
        b[i] = s / L.at(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int k = i + 1; k < n; ++k) s -= L.at(k, i) * b[k];
        b[i] = s / L.at(i, i);
    }
}

void jacobi_eigh(const Matrix& G, std::vector<double>& vals, Matrix& vecs) {
    if (G.rows != G.cols) throw DimensionError("jacobi_eigh: matrix not square");
    const int n = G.rows;
    Matrix A = G;
    vecs = Matrix(n, n);
    for (int i = 0; i < n; ++i) vecs.at(i, i) = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A.at(p, q) * A.at(p, q);
        if (off < 1e-300) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double app = A.at(p, p);
                const double aqq = A.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A.at(k, p);
                    const double akq = A.at(k, q);
                    A.at(k, p) = c * akp - s * akq;
                    A.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A.at(p, k);
                    const double aqk = A.at(q, k);
                    A.at(p, k) = c * apk - s * aqk;
                    A.at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = vecs.at(k, p);
                    const double vkq = vecs.at(k, q);
                    vecs.at(k, p) = c * vkp - s * vkq;
                    vecs.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    vals.resize(n);
    for (int i = 0; i < n; ++i) vals[i] = A.at(i, i);
}

std::vector<double> pinv_solve_psd(const Matrix& G, std::span<const double> b) {
    const int n = G.rows;
    if (static_cast<int>(b.size()) != n) throw DimensionError("pinv_solve_psd: rhs size");
    std::vector<double> vals;
    Matrix V;
    jacobi_eigh(G, vals, V);
    double vmax = 0.0;
    for (double v : vals) vmax = std::max(vmax, std::abs(v));
    const double cutoff = vmax * n * 1e-14;
    // x = V diag(1/val where val > cutoff) V^T b
    std::vector<double> y(n, 0.0);
    for (int j = 0; j < n; ++j) {
        if (vals[j] <= cutoff) continue;
        double d = 0.0;
        for (int i = 0; i < n; ++i) d += V.at(i, j) * b[i];
        y[j] = d / vals[j];
    }
    std::vector<double> x(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += V.at(i, j) * y[j];
        x[i] = s;
    }
    return x;
}

}  // namespace sprint
