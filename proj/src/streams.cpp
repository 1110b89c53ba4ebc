#include "sprint/streams.hpp"

namespace sprint {

Matrix FullForwardSource::stream_entering(int s) const {
    const int S = model_.config.n_sublayers();
    if (s < 1 || s > S + 1) throw DataError("stream_entering: index outside 1..S+1");
    Matrix X = embed(model_, calib_.sequences);
    if (s == 1) return X;
    return run_span(model_, std::move(X), 1, s - 1, {});
}

const Matrix& DenseRefs::after(int site) const {
    auto it = site_out.find(site);
    if (it == site_out.end())
        throw DataError("no reference cached for site " + std::to_string(site));
    return it->second;
}

DenseRefs build_dense_refs(const SublayerStack& model, const CalibrationSet& calib) {
    const int S = model.config.n_sublayers();
    std::set<int> trace;
    for (int s = 1; s <= S; ++s) {
        const Sublayer& l = model.sublayer(s);
        if (!l.pruned && l.kind == SublayerKind::mlp) trace.insert(s);
    }
    trace.insert(S);
    ForwardResult fr = forward(model, calib.sequences, trace);
    DenseRefs refs;
    refs.final_site = S;
    refs.site_out = std::move(fr.captured);
    return refs;
}

}  // namespace sprint
