#pragma once

#include <map>

#include "sprint/calibration.hpp"
#include "sprint/model.hpp"

namespace sprint {

// Yields the current model's residual stream entering sublayer s,
// for s in 1..S+1 (S+1 is the stream after the last sublayer).
class StreamSource {
  public:
    virtual ~StreamSource() = default;
    virtual Matrix stream_entering(int s) const = 0;
};

// Recomputes from the embedding every time. Used by oracle paths and as
// the checkpoint-free reference.
class FullForwardSource : public StreamSource {
  public:
    FullForwardSource(const SublayerStack& model, const CalibrationSet& calib)
        : model_(model), calib_(calib) {}
    Matrix stream_entering(int s) const override;

  private:
    const SublayerStack& model_;
    const CalibrationSet& calib_;
};

// Reference activations a candidate evaluation compares against:
// ref_after(d) is the stream right after sublayer d.
class RefSource {
  public:
    virtual ~RefSource() = default;
    virtual Matrix ref_after(int site) const = 0;
};

// Immutable per-site cache of the reference model's outputs, built once
// over the calibration set: every live feed-forward sublayer plus the
// final residual-stream output.
struct DenseRefs {
    std::map<int, Matrix> site_out;  // d -> stream after sublayer d
    int final_site = 0;              // == S; stream after the whole stack

    const Matrix& after(int site) const;
};

DenseRefs build_dense_refs(const SublayerStack& model, const CalibrationSet& calib);

class DenseRefSource : public RefSource {
  public:
    explicit DenseRefSource(const DenseRefs& refs) : refs_(refs) {}
    Matrix ref_after(int site) const override { return refs_.after(site); }

  private:
    const DenseRefs& refs_;
};

// References taken from the evolving pruned model instead of the dense
// one (experimentation mode); pulls streams straight from a StreamSource.
class CurrentRefSource : public RefSource {
  public:
    explicit CurrentRefSource(const StreamSource& src) : src_(src) {}
    Matrix ref_after(int site) const override { return src_.stream_entering(site + 1); }

  private:
    const StreamSource& src_;
};

}  // namespace sprint
