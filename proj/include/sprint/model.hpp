#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "sprint/matrix.hpp"

namespace sprint {

struct ModelConfig {
    int d_model = 64;
    int n_heads = 4;
    int d_ff = 128;
    int n_layers = 8;
    int vocab_size = 256;
    int max_seq_len = 512;
    double norm_eps = 1e-5;

    int n_sublayers() const { return 2 * n_layers; }
    int head_dim() const { return d_model / n_heads; }
    void validate() const;  // throws ConfigError
    bool same_dims(const ModelConfig& o) const;
};

enum class SublayerKind { mha, mlp };

// odd indices are attention, even indices are feed-forward (1-based)
inline SublayerKind kind_for_index(int s) {
    return (s % 2 == 1) ? SublayerKind::mha : SublayerKind::mlp;
}

// One residual sublayer decomposed as f(X) = out_proj * h(X), where h
// covers the pre-norm and everything up to (excluding) the output
// projection. Attention sublayers hold q/k/v, feed-forward ones gate/up.
struct Sublayer {
    int index = 0;
    SublayerKind kind = SublayerKind::mha;
    bool pruned = false;

    Matrix norm_scale;  // 1 x d_model rms gain
    Matrix wq, wk, wv;  // mha: d_model x d_model
    Matrix w_gate, w_up;  // mlp: d_ff x d_model
    Matrix out_proj;    // mha: d_model x d_model, mlp: d_model x d_ff
};

struct SublayerStack {
    ModelConfig config;
    Matrix embedding;         // vocab x d_model
    std::vector<Sublayer> sublayers;
    Matrix final_norm_scale;  // 1 x d_model
    Matrix lm_head;           // d_model x vocab

    const Sublayer& sublayer(int s) const { return sublayers[static_cast<size_t>(s) - 1]; }
    Sublayer& sublayer(int s) { return sublayers[static_cast<size_t>(s) - 1]; }

    int n_live_mha() const;
    int n_live_mlp() const;
    std::vector<int> pruned_indices() const;
};

using TokenBatch = std::vector<std::vector<int>>;

// Deterministic scaled-uniform init: two calls with the same (config, seed)
// produce identical weights.
SublayerStack build_toy_model(const ModelConfig& config, uint64_t seed);

// Embedding lookup; the result carries the batch structure in seq_lens.
Matrix embed(const SublayerStack& model, const TokenBatch& tokens);

// Applies one unpruned sublayer. Returns (Z, Y) with Z = h(X) and
// Y = X + out_proj * Z.
std::pair<Matrix, Matrix> sublayer_apply(const Sublayer& layer, const Matrix& X,
                                         const ModelConfig& config);

// Applies sublayers start..end to X, skipping pruned ones and extra_skip.
// Returns the final stream only.
Matrix run_span(const SublayerStack& model, Matrix X, int start, int end,
                const std::set<int>& extra_skip);

// Final norm + LM head.
Matrix generator_logits(const SublayerStack& model, const Matrix& X);

struct ForwardResult {
    Matrix logits;                  // vocab x tokens
    std::map<int, Matrix> captured; // k -> stream after sublayer k (0 = embedding)
};

// Full pass: embedding, every unpruned sublayer in order, generator.
// trace requests capture of the stream after each listed sublayer index
// (0 captures the embedding output).
ForwardResult forward(const SublayerStack& model, const TokenBatch& tokens,
                      const std::set<int>& trace);

// Resumes from a stored residual-stream state entering sublayer `start` and
// applies sublayers start..end (skipping pruned ones and extra_skip).
// Returns the stream after every position in the range; skipped positions
// map to their pass-through value.
std::map<int, Matrix> forward_from(const SublayerStack& model, const Matrix& x_start,
                                   int start, int end, const std::set<int>& extra_skip);

}  // namespace sprint
