#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sprint/model.hpp"

namespace sprint {

// Fixed-length token sequences used for sensitivity measurement and tuning.
struct CalibrationSet {
    TokenBatch sequences;
    int seq_len = 0;

    int n_seqs() const { return static_cast<int>(sequences.size()); }
    long total_tokens() const { return static_cast<long>(sequences.size()) * seq_len; }
};

// Samples n_seqs non-overlapping windows of seq_len tokens from a .tokens
// file (raw little-endian u32 ids, no header). Window choice is a seeded
// shuffle of the aligned partition; selected windows keep file order.
CalibrationSet load_calibration(const std::string& path, int n_seqs, int seq_len, uint64_t seed);

// Uniform-random ids, deterministic in the seed.
CalibrationSet synth_calibration(int vocab_size, int n_seqs, int seq_len, uint64_t seed);

// Validates every id against the model's vocabulary and the sequence
// length against max_seq_len.
void check_against(const CalibrationSet& set, const ModelConfig& config);

void save_tokens(const std::string& path, const std::vector<uint32_t>& ids);

}  // namespace sprint
