#include "sprint/calibration.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "sprint/rng.hpp"

namespace sprint {

CalibrationSet load_calibration(const std::string& path, int n_seqs, int seq_len,
                                uint64_t seed) {
    if (n_seqs < 1 || seq_len < 1)
        throw ConfigError("calibration: n_seqs and seq_len must be positive");
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw DataError("cannot open " + path);
    const auto size = static_cast<long>(f.tellg());
    if (size % 4 != 0) throw FormatError(path + ": size is not a multiple of 4 bytes");
    const long total = size / 4;
    const long windows = total / seq_len;
    if (windows < n_seqs)
        throw DataError(path + ": holds " + std::to_string(total) + " tokens, need at least " +
                        std::to_string(static_cast<long>(n_seqs) * seq_len));

    // shuffle the aligned partition, keep the first n_seqs windows in file order
    std::vector<long> idx(static_cast<size_t>(windows));
    std::iota(idx.begin(), idx.end(), 0L);
    Rng rng(seed);
    for (long i = windows - 1; i > 0; --i) {
        const long j = rng.uniform_int(static_cast<int>(i + 1));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(n_seqs));
    std::sort(idx.begin(), idx.end());

    f.seekg(0);
    CalibrationSet set;
    set.seq_len = seq_len;
    std::vector<uint32_t> buf(static_cast<size_t>(seq_len));
    for (long w : idx) {
        f.seekg(w * seq_len * 4);
        f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
        if (!f) throw FormatError(path + ": short read");
        std::vector<int> seq(buf.begin(), buf.end());
        set.sequences.push_back(std::move(seq));
    }
    return set;
}

CalibrationSet synth_calibration(int vocab_size, int n_seqs, int seq_len, uint64_t seed) {
    if (vocab_size < 1 || n_seqs < 1 || seq_len < 1)
        throw ConfigError("synth calibration: arguments must be positive");
    Rng rng(seed);
    CalibrationSet set;
    set.seq_len = seq_len;
    for (int s = 0; s < n_seqs; ++s) {
        std::vector<int> seq(static_cast<size_t>(seq_len));
        for (int& id : seq) id = rng.uniform_int(vocab_size);
        set.sequences.push_back(std::move(seq));
    }
    return set;
}

void check_against(const CalibrationSet& set, const ModelConfig& config) {
    if (set.n_seqs() < 1) throw DataError("calibration set is empty");
    for (const auto& seq : set.sequences) {
        if (static_cast<int>(seq.size()) != set.seq_len)
            throw DataError("calibration sequence length mismatch");
        if (set.seq_len > config.max_seq_len)
            throw DataError("calibration sequences exceed max_seq_len");
        for (int id : seq)
            if (id < 0 || id >= config.vocab_size)
                throw DataError("calibration token id " + std::to_string(id) +
                                " outside vocabulary");
    }
}

void save_tokens(const std::string& path, const std::vector<uint32_t>& ids) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open " + path + " for writing");
    for (uint32_t id : ids) {
        char b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((id >> (8 * i)) & 0xff);
        f.write(b, 4);
    }
    if (!f) throw DataError("write failed: " + path);
}

}  // namespace sprint
