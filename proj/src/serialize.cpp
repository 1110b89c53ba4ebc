#include "sprint/serialize.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sprint {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'R', 'M'};
constexpr uint32_t kVersion = 1;

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

void put_tensor(std::string& out, const std::string& name, const Matrix& m, bool as_vector) {
    put_u16(out, static_cast<uint16_t>(name.size()));
    out.append(name);
    if (as_vector) {
        out.push_back(1);
        put_u64(out, static_cast<uint64_t>(m.rows) * m.cols);
    } else {
        out.push_back(2);
        put_u64(out, static_cast<uint64_t>(m.rows));
        put_u64(out, static_cast<uint64_t>(m.cols));
    }
    for (double v : m.a) put_f64(out, v);
}

std::string sublayer_prefix(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%03d.", index);
    return buf;
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > buf.size()) throw FormatError("model file truncated");
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint8_t>(buf[pos]) |
                     (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string bytes(size_t n) {
        need(n);
        std::string s = buf.substr(pos, n);
        pos += n;
        return s;
    }
    bool eof() const { return pos == buf.size(); }
};

Matrix read_tensor_data(Reader& r, int rows, int cols) {
    Matrix m(rows, cols);
    for (double& v : m.a) v = r.f64();
    return m;
}

}  // namespace

std::string model_to_bytes(const SublayerStack& model) {
    const ModelConfig& c = model.config;
    nlohmann::ordered_json cfg;
    cfg["d_model"] = c.d_model;
    cfg["n_heads"] = c.n_heads;
    cfg["d_ff"] = c.d_ff;
    cfg["n_layers"] = c.n_layers;
    cfg["vocab_size"] = c.vocab_size;
    cfg["max_seq_len"] = c.max_seq_len;
    cfg["norm_eps"] = c.norm_eps;
    cfg["pruned"] = model.pruned_indices();
    const std::string cfg_str = cfg.dump();

    std::string out;
    out.append(kMagic, 4);
    put_u32(out, kVersion);
    put_u64(out, cfg_str.size());
    out.append(cfg_str);

    put_tensor(out, "embedding", model.embedding, false);
    for (const Sublayer& l : model.sublayers) {
        const std::string p = sublayer_prefix(l.index);
        put_tensor(out, p + "norm", l.norm_scale, true);
        if (l.kind == SublayerKind::mha) {
            put_tensor(out, p + "wq", l.wq, false);
            put_tensor(out, p + "wk", l.wk, false);
            put_tensor(out, p + "wv", l.wv, false);
            put_tensor(out, p + "wo", l.out_proj, false);
        } else {
            put_tensor(out, p + "wgate", l.w_gate, false);
            put_tensor(out, p + "wup", l.w_up, false);
            put_tensor(out, p + "wdown", l.out_proj, false);
        }
    }
    put_tensor(out, "final_norm", model.final_norm_scale, true);
    put_tensor(out, "lm_head", model.lm_head, false);
    return out;
}

void save_model(const std::string& path, const SublayerStack& model) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open " + path + " for writing");
    const std::string bytes = model_to_bytes(model);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed: " + path);
}

SublayerStack load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string buf = ss.str();

    Reader r{buf};
    if (r.bytes(4) != std::string(kMagic, 4)) throw FormatError("bad magic, not an SPRM file");
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw FormatError("unsupported SPRM version " + std::to_string(version));
    const uint64_t cfg_len = r.u64();
    nlohmann::json cfg;
    try {
        cfg = nlohmann::json::parse(r.bytes(cfg_len));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad config block: ") + e.what());
    }

    SublayerStack m;
    try {
        m.config.d_model = cfg.at("d_model").get<int>();
        m.config.n_heads = cfg.at("n_heads").get<int>();
        m.config.d_ff = cfg.at("d_ff").get<int>();
        m.config.n_layers = cfg.at("n_layers").get<int>();
        m.config.vocab_size = cfg.at("vocab_size").get<int>();
        m.config.max_seq_len = cfg.at("max_seq_len").get<int>();
        m.config.norm_eps = cfg.at("norm_eps").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config block missing field: ") + e.what());
    }
    m.config.validate();

    const int S = m.config.n_sublayers();
    m.sublayers.resize(static_cast<size_t>(S));
    for (int s = 1; s <= S; ++s) {
        m.sublayer(s).index = s;
        m.sublayer(s).kind = kind_for_index(s);
    }
    for (int p : cfg.value("pruned", std::vector<int>{})) {
        if (p < 1 || p > S) throw FormatError("pruned index out of range");
        m.sublayer(p).pruned = true;
    }

    while (!r.eof()) {
        const uint16_t name_len = r.u16();
        const std::string name = r.bytes(name_len);
        const uint8_t rank = static_cast<uint8_t>(r.bytes(1)[0]);
        int rows = 0, cols = 0;
        if (rank == 1) {
            rows = 1;
            cols = static_cast<int>(r.u64());
        } else if (rank == 2) {
            rows = static_cast<int>(r.u64());
            cols = static_cast<int>(r.u64());
        } else {
            throw FormatError("tensor '" + name + "' has unsupported rank");
        }
        Matrix t = read_tensor_data(r, rows, cols);

        auto expect = [&](int er, int ec) {
            if (rows != er || cols != ec)
                throw FormatError("tensor '" + name + "' has unexpected shape");
        };
        if (name == "embedding") {
            expect(m.config.vocab_size, m.config.d_model);
            m.embedding = std::move(t);
        } else if (name == "final_norm") {
            expect(1, m.config.d_model);
            m.final_norm_scale = std::move(t);
        } else if (name == "lm_head") {
            expect(m.config.d_model, m.config.vocab_size);
            m.lm_head = std::move(t);
        } else if (name.size() > 5 && name[0] == 's' && name[4] == '.') {
            const int idx = std::stoi(name.substr(1, 3));
            if (idx < 1 || idx > S) throw FormatError("tensor '" + name + "' index out of range");
            Sublayer& l = m.sublayer(idx);
            const std::string field = name.substr(5);
            if (field == "norm") {
                expect(1, m.config.d_model);
                l.norm_scale = std::move(t);
            } else if (field == "wq" || field == "wk" || field == "wv" || field == "wo") {
                if (l.kind != SublayerKind::mha)
                    throw FormatError("tensor '" + name + "' on a non-attention sublayer");
                expect(m.config.d_model, m.config.d_model);
                if (field == "wq") l.wq = std::move(t);
                else if (field == "wk") l.wk = std::move(t);
                else if (field == "wv") l.wv = std::move(t);
                else l.out_proj = std::move(t);
            } else if (field == "wgate" || field == "wup") {
                if (l.kind != SublayerKind::mlp)
                    throw FormatError("tensor '" + name + "' on a non-mlp sublayer");
                expect(m.config.d_ff, m.config.d_model);
                (field == "wgate" ? l.w_gate : l.w_up) = std::move(t);
            } else if (field == "wdown") {
                if (l.kind != SublayerKind::mlp)
                    throw FormatError("tensor '" + name + "' on a non-mlp sublayer");
                expect(m.config.d_model, m.config.d_ff);
                l.out_proj = std::move(t);
            } else {
                throw FormatError("unknown tensor '" + name + "'");
            }
        } else {
            throw FormatError("unknown tensor '" + name + "'");
        }
    }

    // completeness check
    auto missing = [&](const Matrix& t) { return t.rows == 0; };
    if (missing(m.embedding) || missing(m.final_norm_scale) || missing(m.lm_head))
        throw FormatError("model file missing top-level tensors");
    for (const Sublayer& l : m.sublayers) {
        const bool ok = l.kind == SublayerKind::mha
                            ? !(missing(l.norm_scale) || missing(l.wq) || missing(l.wk) ||
                                missing(l.wv) || missing(l.out_proj))
                            : !(missing(l.norm_scale) || missing(l.w_gate) || missing(l.w_up) ||
                                missing(l.out_proj));
        if (!ok)
            throw FormatError("model file missing tensors for sublayer " +
                              std::to_string(l.index));
    }
    return m;
}

}  // namespace sprint
