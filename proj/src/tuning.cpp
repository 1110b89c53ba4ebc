#include "sprint/tuning.hpp"

#include <algorithm>
#include <cmath>

namespace sprint {

std::vector<int> select_tuned_rows(const Matrix& W, const Matrix& z_hat, double rows_percent) {
    if (!(rows_percent > 0.0) || rows_percent > 100.0)
        throw ConfigError("rows_percent must lie in (0, 100]");
    if (W.cols != z_hat.rows) throw DimensionError("select_tuned_rows: W cols != z rows");

    std::vector<double> znorm(static_cast<size_t>(z_hat.rows));
    for (int j = 0; j < z_hat.rows; ++j) {
        double s = 0.0;
        const double* zr = z_hat.row(j);
        for (int t = 0; t < z_hat.cols; ++t) s += zr[t] * zr[t];
        znorm[static_cast<size_t>(j)] = std::sqrt(s);
    }

    std::vector<std::pair<double, int>> scored(static_cast<size_t>(W.rows));
    for (int i = 0; i < W.rows; ++i) {
        double score = 0.0;
        const double* wr = W.row(i);
        for (int j = 0; j < W.cols; ++j) score += std::abs(wr[j]) * znorm[static_cast<size_t>(j)];
        scored[static_cast<size_t>(i)] = {score, i};
    }
    const int keep = static_cast<int>(std::ceil(rows_percent * W.rows / 100.0));
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> rows;
    rows.reserve(static_cast<size_t>(keep));
    for (int i = 0; i < keep; ++i) rows.push_back(scored[static_cast<size_t>(i)].second);
    std::sort(rows.begin(), rows.end());
    return rows;
}

double auto_ridge(const Matrix& gram_zz) {
    double trace = 0.0;
    for (int i = 0; i < gram_zz.rows; ++i) trace += gram_zz.at(i, i);
    return 1e-4 * trace / gram_zz.rows;
}

TunedProjection solve_rows_lstsq(const TuneJob& job, const std::vector<int>& rows, double ridge) {
    const Matrix& Z = job.z_hat;
    if (job.x_hat.cols != Z.cols || job.x_ref.cols != Z.cols)
        throw DimensionError("solve_rows_lstsq: token counts differ");
    if (job.w0.rows != job.x_hat.rows || job.w0.cols != Z.rows)
        throw DimensionError("solve_rows_lstsq: projection shape mismatch");
    if (!(ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");

    const int d_ff = Z.rows;
    Matrix G = gram(Z);  // shared across all row subproblems
    for (int i = 0; i < d_ff; ++i) G.at(i, i) += ridge;

    Matrix chol = G;
    const bool spd = cholesky_factor(chol);

    TunedProjection out;
    out.d = job.d;
    out.w_tuned = job.w0;
    out.tuned_rows = rows;

    std::vector<double> rhs(static_cast<size_t>(d_ff));
    for (int i : rows) {
        if (i < 0 || i >= job.w0.rows) throw DimensionError("solve_rows_lstsq: row out of range");
        // rhs = Z * r_i^T + ridge * w0_i, with r_i the residual target row
        for (int j = 0; j < d_ff; ++j) {
            double s = 0.0;
            const double* zr = Z.row(j);
            for (int t = 0; t < Z.cols; ++t)
                s += zr[t] * (job.x_ref.at(i, t) - job.x_hat.at(i, t));
            rhs[static_cast<size_t>(j)] = s + ridge * job.w0.at(i, j);
        }
        if (spd) {
            cholesky_solve(chol, rhs);
            for (int j = 0; j < d_ff; ++j) out.w_tuned.at(i, j) = rhs[static_cast<size_t>(j)];
        } else {
            // rank-deficient Gram: minimum-norm solution of the normal equations
            const std::vector<double> w = pinv_solve_psd(G, rhs);
            for (int j = 0; j < d_ff; ++j) out.w_tuned.at(i, j) = w[static_cast<size_t>(j)];
        }
    }

    Matrix fit = matmul(out.w_tuned, Z);
    add_inplace(fit, job.x_hat);
    out.residual_error = frob_dist(fit, job.x_ref);
    return out;
}

std::pair<TunedProjection, Matrix> in_compression_tune(const SublayerStack& model, int s, int d,
                                                       const StreamSource& streams,
                                                       const RefSource& refs,
                                                       double rows_percent,
                                                       std::optional<double> ridge) {
    const Sublayer& site = model.sublayer(d);
    if (site.pruned || site.kind != SublayerKind::mlp)
        throw ConfigError("tuning site must be a live feed-forward sublayer");
    if (model.sublayer(s).pruned) throw ConfigError("candidate is already pruned");
    if (d <= s) throw ConfigError("tuning site must lie above the candidate");

    Matrix x_s = streams.stream_entering(s);
    Matrix x_hat = run_span(model, std::move(x_s), s, d - 1, {s});
    auto [z_hat, x_hat_next] = sublayer_apply(site, x_hat, model.config);
    (void)x_hat_next;  // untuned output; the solve replaces it

    TuneJob job;
    job.d = d;
    job.x_ref = refs.ref_after(d);
    job.rows_percent = rows_percent;
    const std::vector<int> rows = select_tuned_rows(site.out_proj, z_hat, rows_percent);
    job.z_hat = std::move(z_hat);
    job.x_hat = std::move(x_hat);
    job.w0 = site.out_proj;

    const double lambda = ridge ? *ridge : auto_ridge(gram(job.z_hat));
    TunedProjection tuned = solve_rows_lstsq(job, rows, lambda);

    Matrix x_hat_t = matmul(tuned.w_tuned, job.z_hat);
    add_inplace(x_hat_t, job.x_hat);
    return {std::move(tuned), std::move(x_hat_t)};
}

}  // namespace sprint
