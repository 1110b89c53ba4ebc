#pragma once

#include <set>
#include <string>

#include "sprint/calibration.hpp"
#include "sprint/model.hpp"

namespace sprint {

// Per-type latency reductions plus the fixed embedding/generator overhead.
struct LatencyTable {
    double t_mha_ms = 0.0;
    double t_mlp_ms = 0.0;
    double overhead_ms = 0.0;

    void validate() const;  // throws ConfigError
};

// Times one full forward pass (embedding, live sublayers minus extra_skip,
// generator). Pluggable so tests can substitute a deterministic clock.
class ForwardTimer {
  public:
    virtual ~ForwardTimer() = default;
    virtual double time_forward_ms(const SublayerStack& model, const CalibrationSet& workload,
                                   const std::set<int>& extra_skip) = 0;
};

class WallClockTimer : public ForwardTimer {
  public:
    double time_forward_ms(const SublayerStack& model, const CalibrationSet& workload,
                           const std::set<int>& extra_skip) override;
};

// Charges a fixed cost per live sublayer by type; makes measurement
// deterministic in tests.
class SyntheticTimer : public ForwardTimer {
  public:
    SyntheticTimer(double mha_ms, double mlp_ms, double overhead_ms)
        : mha_ms_(mha_ms), mlp_ms_(mlp_ms), overhead_ms_(overhead_ms) {}
    double time_forward_ms(const SublayerStack& model, const CalibrationSet& workload,
                           const std::set<int>& extra_skip) override;

  private:
    double mha_ms_, mlp_ms_, overhead_ms_;
};

// Derives the table by timing the unpruned model against models with half
// of each sublayer type skipped, taking the median over trials.
LatencyTable measure_latency_table(const SublayerStack& model, const CalibrationSet& workload,
                                   int trials, ForwardTimer& timer);

// n1 * t_mha + n2 * t_mlp + overhead for a model with n1 live attention
// and n2 live feed-forward sublayers.
double model_latency(int n1, int n2, const LatencyTable& table);

// Cost of one iteration of an exhaustive leave-one-out pruner that
// re-evaluates the full model once per remaining sublayer:
// (n1 + n2 - 1) * (n1 * t_mha + n2 * t_mlp). Overhead excluded.
double estimate_exhaustive_pruner_step(int n1, int n2, const LatencyTable& table);

// Recovers per-type times from two measured exhaustive-pruner step totals
// at different (n1, n2); overhead comes out as zero.
LatencyTable fit_table_from_step_times(int n1_a, int n2_a, double total_a, int n1_b, int n2_b,
                                       double total_b);

LatencyTable load_latency_table(const std::string& path);
void save_latency_table(const std::string& path, const LatencyTable& table);

}  // namespace sprint
