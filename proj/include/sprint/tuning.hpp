#pragma once

#include <optional>
#include <vector>

#include "sprint/matrix.hpp"
#include "sprint/model.hpp"
#include "sprint/streams.hpp"

namespace sprint {

// One least-squares alignment problem for a feed-forward output
// projection: fit rows of W so that x_hat + W * z_hat tracks x_ref.
struct TuneJob {
    int d = 0;            // index of the sublayer being tuned
    Matrix z_hat;         // d_ff x n intermediate activation, candidate skipped
    Matrix x_hat;         // d_model x n stream entering d, candidate skipped
    Matrix x_ref;         // d_model x n reference output after d
    Matrix w0;            // d_model x d_ff original projection
    double rows_percent = 100.0;
};

struct TunedProjection {
    int d = 0;
    Matrix w_tuned;
    std::vector<int> tuned_rows;    // 0-based row indices, ascending
    double residual_error = 0.0;    // ||(x_hat + w_tuned z_hat) - x_ref||_F
};

// Ranks output rows by the summed magnitude-times-activation-norm score
// |W_ij| * ||z_hat row j||_2 and keeps the top ceil(percent/100 * rows);
// ties go to the lower row index.
std::vector<int> select_tuned_rows(const Matrix& W, const Matrix& z_hat, double rows_percent);

// Scale-aware default ridge weight: 1e-4 * trace(z z^T) / d_ff.
double auto_ridge(const Matrix& z_hat);

// Solves each selected row of min ||w^T z_hat - r||^2 + ridge ||w - w0||^2
// against the shared Gram matrix; unselected rows are copied unchanged.
// A rank-deficient Gram at ridge 0 falls back to the minimum-norm solution.
TunedProjection solve_rows_lstsq(const TuneJob& job, const std::vector<int>& rows, double ridge);

// Builds and solves the tune job for pruning candidate s evaluated at
// feed-forward site d: streams give the current model's activations, the
// candidate is skipped on the way up, refs give the target output.
// Returns the tuned projection and the tuned output stream after d.
std::pair<TunedProjection, Matrix> in_compression_tune(const SublayerStack& model, int s, int d,
                                                       const StreamSource& streams,
                                                       const RefSource& refs,
                                                       double rows_percent,
                                                       std::optional<double> ridge);

}  // namespace sprint
