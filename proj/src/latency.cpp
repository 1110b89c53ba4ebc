#include "sprint/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace sprint {

void LatencyTable::validate() const {
    if (!(t_mha_ms > 0.0) || !(t_mlp_ms > 0.0))
        throw ConfigError("latency table: per-type times must be positive");
    if (!(overhead_ms >= 0.0) || !std::isfinite(overhead_ms) || !std::isfinite(t_mha_ms) ||
        !std::isfinite(t_mlp_ms))
        throw ConfigError("latency table: entries must be finite, overhead nonnegative");
}

double WallClockTimer::time_forward_ms(const SublayerStack& model, const CalibrationSet& workload,
                                       const std::set<int>& extra_skip) {
    const auto t0 = std::chrono::steady_clock::now();
    Matrix X = embed(model, workload.sequences);
    X = run_span(model, std::move(X), 1, model.config.n_sublayers(), extra_skip);
    const Matrix logits = generator_logits(model, X);
    const auto t1 = std::chrono::steady_clock::now();
    // fold the result into a volatile sink so the pass cannot be elided
    volatile double sink = logits.at(0, 0);
    (void)sink;
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

double SyntheticTimer::time_forward_ms(const SublayerStack& model, const CalibrationSet&,
                                       const std::set<int>& extra_skip) {
    double total = overhead_ms_;
    for (const Sublayer& l : model.sublayers) {
        if (l.pruned || extra_skip.count(l.index)) continue;
        total += (l.kind == SublayerKind::mha) ? mha_ms_ : mlp_ms_;
    }
    return total;
}

namespace {

double median_time(ForwardTimer& timer, const SublayerStack& model,
                   const CalibrationSet& workload, const std::set<int>& skip, int trials) {
    std::vector<double> times(static_cast<size_t>(trials));
    for (double& t : times) t = timer.time_forward_ms(model, workload, skip);
    std::sort(times.begin(), times.end());
    const size_t n = times.size();
    return (n % 2 == 1) ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
}

std::set<int> first_live_of_kind(const SublayerStack& model, SublayerKind kind, int k) {
    std::set<int> skip;
    for (const Sublayer& l : model.sublayers) {
        if (static_cast<int>(skip.size()) == k) break;
        if (!l.pruned && l.kind == kind) skip.insert(l.index);
    }
    return skip;
}

}  // namespace

LatencyTable measure_latency_table(const SublayerStack& model, const CalibrationSet& workload,
                                   int trials, ForwardTimer& timer) {
    const int n1 = model.n_live_mha();
    const int n2 = model.n_live_mlp();
    if (n1 < 2 || n2 < 2)
        throw ConfigError("latency measurement needs at least two live sublayers of each type");
    if (trials < 3) throw ConfigError("latency measurement needs at least 3 trials");

    const int k1 = n1 / 2;
    const int k2 = n2 / 2;
    const double full = median_time(timer, model, workload, {}, trials);
    const double less_mha = median_time(
        timer, model, workload, first_live_of_kind(model, SublayerKind::mha, k1), trials);
    const double less_mlp = median_time(
        timer, model, workload, first_live_of_kind(model, SublayerKind::mlp, k2), trials);

    LatencyTable t;
    t.t_mha_ms = (full - less_mha) / k1;
    t.t_mlp_ms = (full - less_mlp) / k2;
    if (!(t.t_mha_ms > 0.0) || !(t.t_mlp_ms > 0.0))
        throw MeasurementError(
            "per-sublayer time came out nonpositive; rerun with more trials or a larger "
            "workload");
    t.overhead_ms = std::max(0.0, full - n1 * t.t_mha_ms - n2 * t.t_mlp_ms);
    return t;
}

double model_latency(int n1, int n2, const LatencyTable& table) {
    if (n1 < 0 || n2 < 0) throw ConfigError("model_latency: counts must be nonnegative");
    return n1 * table.t_mha_ms + n2 * table.t_mlp_ms + table.overhead_ms;
}

double estimate_exhaustive_pruner_step(int n1, int n2, const LatencyTable& table) {
    if (n1 + n2 < 1) throw ConfigError("exhaustive step estimate needs at least one sublayer");
    return (n1 + n2 - 1) * (n1 * table.t_mha_ms + n2 * table.t_mlp_ms);
}

LatencyTable fit_table_from_step_times(int n1_a, int n2_a, double total_a, int n1_b, int n2_b,
                                       double total_b) {
    // total = (n1 + n2 - 1) * (n1 * t1 + n2 * t2), one row per measurement
    const double ca = total_a / (n1_a + n2_a - 1);
    const double cb = total_b / (n1_b + n2_b - 1);
    const double det = static_cast<double>(n1_a) * n2_b - static_cast<double>(n1_b) * n2_a;
    if (det == 0.0) throw ConfigError("step-time fit: rows are linearly dependent");
    LatencyTable t;
    t.t_mha_ms = (ca * n2_b - cb * n2_a) / det;
    t.t_mlp_ms = (static_cast<double>(n1_a) * cb - static_cast<double>(n1_b) * ca) / det;
    t.overhead_ms = 0.0;
    t.validate();
    return t;
}

LatencyTable load_latency_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    LatencyTable t;
    try {
        t.t_mha_ms = j.at("t_mha_ms").get<double>();
        t.t_mlp_ms = j.at("t_mlp_ms").get<double>();
        t.overhead_ms = j.at("overhead_ms").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    t.validate();
    return t;
}

void save_latency_table(const std::string& path, const LatencyTable& table) {
    nlohmann::ordered_json j;
    j["t_mha_ms"] = table.t_mha_ms;
    j["t_mlp_ms"] = table.t_mlp_ms;
    j["overhead_ms"] = table.overhead_ms;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

}  // namespace sprint
