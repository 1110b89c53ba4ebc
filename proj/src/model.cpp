#include "sprint/model.hpp"

#include <cmath>
#include <string>

#include "sprint/rng.hpp"

namespace sprint {

void ModelConfig::validate() const {
    if (d_model <= 0 || n_heads <= 0 || d_ff <= 0 || n_layers <= 0 || vocab_size <= 0 ||
        max_seq_len <= 0)
        throw ConfigError("model config: all dimensions must be positive");
    if (d_model % n_heads != 0) throw ConfigError("model config: n_heads must divide d_model");
    if (!(norm_eps > 0.0)) throw ConfigError("model config: norm_eps must be positive");
}

bool ModelConfig::same_dims(const ModelConfig& o) const {
    return d_model == o.d_model && n_heads == o.n_heads && d_ff == o.d_ff &&
           n_layers == o.n_layers && vocab_size == o.vocab_size &&
           max_seq_len == o.max_seq_len && norm_eps == o.norm_eps;
}

int SublayerStack::n_live_mha() const {
    int n = 0;
    for (const auto& l : sublayers) n += (!l.pruned && l.kind == SublayerKind::mha);
    return n;
}

int SublayerStack::n_live_mlp() const {
    int n = 0;
    for (const auto& l : sublayers) n += (!l.pruned && l.kind == SublayerKind::mlp);
    return n;
}

std::vector<int> SublayerStack::pruned_indices() const {
    std::vector<int> out;
    for (const auto& l : sublayers)
        if (l.pruned) out.push_back(l.index);
    return out;
}

namespace {

Matrix uniform_matrix(Rng& rng, int rows, int cols, double scale) {
    Matrix m(rows, cols);
    for (double& v : m.a) v = rng.uniform(-scale, scale);
    return m;
}

Matrix ones_row(int n) {
    Matrix m(1, n);
    for (double& v : m.a) v = 1.0;
    return m;
}

// column-wise rms normalization scaled by the gain row
Matrix rms_norm(const Matrix& X, const Matrix& gain, double eps) {
    Matrix out(X.rows, X.cols);
    out.seq_lens = X.seq_lens;
    for (int t = 0; t < X.cols; ++t) {
        double ss = 0.0;
        for (int i = 0; i < X.rows; ++i) {
            const double v = X.at(i, t);
            ss += v * v;
        }
        const double inv = 1.0 / std::sqrt(ss / X.rows + eps);
        for (int i = 0; i < X.rows; ++i) out.at(i, t) = X.at(i, t) * inv * gain.at(0, i);
    }
    return out;
}

// rotary position embedding applied in place to a d_model x len block,
// head by head; pos is 0-based within the sequence
void apply_rope(Matrix& M, int col0, int len, int n_heads, int head_dim) {
    const int half = head_dim / 2;
    for (int t = 0; t < len; ++t) {
        const int c = col0 + t;
        for (int h = 0; h < n_heads; ++h) {
            const int base = h * head_dim;
            for (int i = 0; i < half; ++i) {
                const double freq = std::pow(10000.0, -2.0 * i / head_dim);
                const double ang = t * freq;
                const double ca = std::cos(ang);
                const double sa = std::sin(ang);
                const double x = M.at(base + 2 * i, c);
                const double y = M.at(base + 2 * i + 1, c);
                M.at(base + 2 * i, c) = x * ca - y * sa;
                M.at(base + 2 * i + 1, c) = x * sa + y * ca;
            }
        }
    }
}

std::vector<int> effective_seq_lens(const Matrix& X) {
    if (!X.seq_lens.empty()) return X.seq_lens;
    return {X.cols};
}

// causal multi-head attention mixing; returns the concatenated per-head
// value mixtures (the Z of the decomposition, before the output projection)
Matrix attention_mix(const Matrix& X, const Sublayer& layer, const ModelConfig& cfg) {
    const Matrix xn = rms_norm(X, layer.norm_scale, cfg.norm_eps);
    Matrix Q = matmul(layer.wq, xn);
    Matrix K = matmul(layer.wk, xn);
    const Matrix V = matmul(layer.wv, xn);

    const int hd = cfg.head_dim();
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(hd));

    Matrix Z(cfg.d_model, X.cols);
    Z.seq_lens = X.seq_lens;

    int col0 = 0;
    for (int len : effective_seq_lens(X)) {
        apply_rope(Q, col0, len, cfg.n_heads, hd);
        apply_rope(K, col0, len, cfg.n_heads, hd);
        std::vector<double> scores;
        for (int h = 0; h < cfg.n_heads; ++h) {
            const int base = h * hd;
            for (int t = 0; t < len; ++t) {
                scores.assign(static_cast<size_t>(t) + 1, 0.0);
                double smax = -1e300;
                for (int u = 0; u <= t; ++u) {
                    double dot = 0.0;
                    for (int i = 0; i < hd; ++i)
                        dot += Q.at(base + i, col0 + t) * K.at(base + i, col0 + u);
                    scores[u] = dot * inv_sqrt_hd;
                    smax = std::max(smax, scores[u]);
                }
                double denom = 0.0;
                for (int u = 0; u <= t; ++u) {
                    scores[u] = std::exp(scores[u] - smax);
                    denom += scores[u];
                }
                for (int i = 0; i < hd; ++i) {
                    double acc = 0.0;
                    for (int u = 0; u <= t; ++u) acc += scores[u] * V.at(base + i, col0 + u);
                    Z.at(base + i, col0 + t) = acc / denom;
                }
            }
        }
        col0 += len;
    }
    return Z;
}

// gated feed-forward up to the down projection: silu(gate) * up
Matrix mlp_mix(const Matrix& X, const Sublayer& layer, const ModelConfig& cfg) {
    const Matrix xn = rms_norm(X, layer.norm_scale, cfg.norm_eps);
    Matrix G = matmul(layer.w_gate, xn);
    const Matrix U = matmul(layer.w_up, xn);
    for (size_t i = 0; i < G.a.size(); ++i) {
        const double g = G.a[i];
        const double silu = g / (1.0 + std::exp(-g));
        G.a[i] = silu * U.a[i];
    }
    return G;
}

}  // namespace

SublayerStack build_toy_model(const ModelConfig& config, uint64_t seed) {
    config.validate();
    Rng rng(seed);
    const double s_model = 1.0 / std::sqrt(static_cast<double>(config.d_model));
    const double s_ff = 1.0 / std::sqrt(static_cast<double>(config.d_ff));

    SublayerStack m;
    m.config = config;
    m.embedding = uniform_matrix(rng, config.vocab_size, config.d_model, s_model);
    m.sublayers.reserve(static_cast<size_t>(config.n_sublayers()));
    for (int s = 1; s <= config.n_sublayers(); ++s) {
        Sublayer l;
        l.index = s;
        l.kind = kind_for_index(s);
        l.norm_scale = ones_row(config.d_model);
        if (l.kind == SublayerKind::mha) {
            l.wq = uniform_matrix(rng, config.d_model, config.d_model, s_model);
            l.wk = uniform_matrix(rng, config.d_model, config.d_model, s_model);
            l.wv = uniform_matrix(rng, config.d_model, config.d_model, s_model);
            l.out_proj = uniform_matrix(rng, config.d_model, config.d_model, s_model);
        } else {
            l.w_gate = uniform_matrix(rng, config.d_ff, config.d_model, s_model);
            l.w_up = uniform_matrix(rng, config.d_ff, config.d_model, s_model);
            l.out_proj = uniform_matrix(rng, config.d_model, config.d_ff, s_ff);
        }
        m.sublayers.push_back(std::move(l));
    }
    m.final_norm_scale = ones_row(config.d_model);
    m.lm_head = uniform_matrix(rng, config.d_model, config.vocab_size, s_model);
    return m;
}

Matrix embed(const SublayerStack& model, const TokenBatch& tokens) {
    int total = 0;
    for (const auto& seq : tokens) {
        if (static_cast<int>(seq.size()) > model.config.max_seq_len)
            throw DataError("sequence longer than max_seq_len");
        total += static_cast<int>(seq.size());
    }
    Matrix X(model.config.d_model, total);
    int c = 0;
    for (const auto& seq : tokens) {
        X.seq_lens.push_back(static_cast<int>(seq.size()));
        for (int id : seq) {
            if (id < 0 || id >= model.config.vocab_size)
                throw DataError("token id " + std::to_string(id) + " out of range");
            for (int i = 0; i < model.config.d_model; ++i) X.at(i, c) = model.embedding.at(id, i);
            ++c;
        }
    }
    return X;
}

std::pair<Matrix, Matrix> sublayer_apply(const Sublayer& layer, const Matrix& X,
                                         const ModelConfig& config) {
    if (X.rows != config.d_model) throw DimensionError("sublayer_apply: X rows != d_model");
    Matrix Z = (layer.kind == SublayerKind::mha) ? attention_mix(X, layer, config)
                                                 : mlp_mix(X, layer, config);
    Matrix Y = matmul(layer.out_proj, Z);
    add_inplace(Y, X);
    Y.seq_lens = X.seq_lens;
    return {std::move(Z), std::move(Y)};
}

Matrix run_span(const SublayerStack& model, Matrix X, int start, int end,
                const std::set<int>& extra_skip) {
    for (int s = start; s <= end; ++s) {
        const Sublayer& l = model.sublayer(s);
        if (l.pruned || extra_skip.count(s)) continue;
        X = sublayer_apply(l, X, model.config).second;
    }
    return X;
}

Matrix generator_logits(const SublayerStack& model, const Matrix& X) {
    const Matrix xn = rms_norm(X, model.final_norm_scale, model.config.norm_eps);
    return matmul_tn(model.lm_head, xn);
}

ForwardResult forward(const SublayerStack& model, const TokenBatch& tokens,
                      const std::set<int>& trace) {
    ForwardResult r;
    Matrix X = embed(model, tokens);
    if (trace.count(0)) r.captured.emplace(0, X);
    const int S = model.config.n_sublayers();
    for (int s = 1; s <= S; ++s) {
        const Sublayer& l = model.sublayer(s);
        if (!l.pruned) X = sublayer_apply(l, X, model.config).second;
        if (trace.count(s)) r.captured.emplace(s, X);
    }
    r.logits = generator_logits(model, X);
    return r;
}

std::map<int, Matrix> forward_from(const SublayerStack& model, const Matrix& x_start,
                                   int start, int end, const std::set<int>& extra_skip) {
    const int S = model.config.n_sublayers();
    if (start > end) throw DataError("forward_from: start > end");
    if (start < 1 || end > S) throw DataError("forward_from: range outside 1..S");
    std::map<int, Matrix> out;
    Matrix X = x_start;
    for (int s = start; s <= end; ++s) {
        const Sublayer& l = model.sublayer(s);
        if (!l.pruned && !extra_skip.count(s)) X = sublayer_apply(l, X, model.config).second;
        out.emplace(s, X);
    }
    return out;
}

}  // namespace sprint
