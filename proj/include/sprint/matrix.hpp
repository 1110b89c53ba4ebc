#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sprint/errors.hpp"

namespace sprint {

// Dense row-major matrix of doubles. Activation matrices are laid out
// feature-major: rows = feature dim, cols = tokens. seq_lens records the
// column grouping of the token batch (one entry per sequence) so causal
// attention knows where each sequence starts; it is empty for plain
// weight matrices and treated as a single block when absent.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;
    std::vector<int> seq_lens;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
    double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
};

// C = A * B, A: r x k, B: k x c. The result inherits B's seq_lens (a
// projection applied to activations keeps the token grouping).
Matrix matmul(const Matrix& A, const Matrix& B);

// C = A^T * B, A: k x r, B: k x c.
Matrix matmul_tn(const Matrix& A, const Matrix& B);

// Z * Z^T, symmetric rows x rows.
Matrix gram(const Matrix& Z);

Matrix transpose(const Matrix& A);
Matrix sub(const Matrix& A, const Matrix& B);
void add_inplace(Matrix& A, const Matrix& B);

double frob_norm(const Matrix& A);
double frob_dist(const Matrix& A, const Matrix& B);
double max_abs_diff(const Matrix& A, const Matrix& B);

// In-place Cholesky factorization of a symmetric positive definite matrix
// (lower triangle). Returns false when a pivot is not strictly positive.
bool cholesky_factor(Matrix& G);

// Solves L L^T x = b in place, given the factor from cholesky_factor.
void cholesky_solve(const Matrix& L, std::span<double> b);

// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
// vals come out unordered; vecs columns are the matching eigenvectors.
void jacobi_eigh(const Matrix& G, std::vector<double>& vals, Matrix& vecs);

// x = G^+ b for symmetric positive semi-definite G (minimum-norm solve of
// the normal equations when the Gram matrix is rank deficient).
std::vector<double> pinv_solve_psd(const Matrix& G, std::span<const double> b);

}  // namespace sprint
