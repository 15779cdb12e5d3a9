#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dropkan/matrix.hpp"
#include "dropkan/rng.hpp"
#include "dropkan/spline.hpp"

namespace dropkan {

enum class DropMode { none, dropout, dropkan_pa, dropkan_ps };

const char* drop_mode_name(DropMode mode);
DropMode drop_mode_from_name(const std::string& name);

/// Drop regime of one layer. `rate` is the probability that a unit is
/// dropped (mask entry 0); retained entries keep value 1. With `scale`,
/// retained signal is multiplied by 1/(1-rate).
struct DropConfig {
    DropMode mode = DropMode::none;
    double rate = 0.0;
    bool scale = false;

    DropConfig() = default;
    DropConfig(DropMode mode, double rate, bool scale);

    double factor() const { return scale ? 1.0 / (1.0 - rate) : 1.0; }
};

/// Binary keep/drop mask. Dropout masks nodes (batch x n_out, n_in == 1);
/// the dropkan modes mask edges (batch x n_out x n_in).
struct MaskTensor {
    std::size_t batch = 0;
    std::size_t n_out = 0;
    std::size_t n_in = 1;
    std::vector<std::uint8_t> values;

    bool empty() const { return values.empty(); }
    std::uint8_t at(std::size_t b, std::size_t j, std::size_t i = 0) const {
        return values[(b * n_out + j) * n_in + i];
    }
    std::uint8_t& at(std::size_t b, std::size_t j, std::size_t i = 0) {
        return values[(b * n_out + j) * n_in + i];
    }
    double fraction_ones() const;
};

/// Draw i.i.d. Bernoulli(1-p) entries in a fixed order: batch-major, then
/// row-major over (j, i). A given seed therefore yields bit-identical masks.
MaskTensor sample_mask(DropMode mode, double p, std::size_t batch, std::size_t n_out,
                       std::size_t n_in, Rng& rng);

/// One KAN layer: a dense (n_out x n_in) matrix of edge activations sharing
/// a grid, plus the layer's drop regime. Nodes sum incoming post-activations.
struct KanLayer {
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    EdgeGrid grid;
    std::vector<EdgeActivation> edges;  // row-major: edge(j, i) = edges[j * n_in + i]
    DropConfig drop;

    KanLayer(std::size_t n_in, std::size_t n_out, EdgeGrid grid, DropConfig drop);

    EdgeActivation& edge(std::size_t j, std::size_t i) { return edges[j * n_in + i]; }
    const EdgeActivation& edge(std::size_t j, std::size_t i) const { return edges[j * n_in + i]; }
};

/// Everything the backward pass needs from one layer's forward.
struct LayerCache {
    Matrix input;               // batch x n_in pre-activations
    std::vector<double> basis;  // batch x n_in x basis_count, row-major
    MaskTensor mask;            // empty unless the drop regime was active
    bool drop_active = false;

    const double* basis_at(std::size_t b, std::size_t i, std::size_t n_in,
                           std::size_t nb) const {
        return basis.data() + (b * n_in + i) * nb;
    }
};

/// Forward one layer.
///  - training=false or mode=none: plain node sums (identical code path, so
///    eval output is bit-identical to a no-drop layer with the same weights).
///  - dropout: node j's sum is multiplied by mask(b,j) and, if scaling, by
///    1/(1-p).
///  - dropkan_pa: node sum of mask(b,j,i)-gated post-activations, whole sum
///    scaled by 1/(1-p) when scaling.
///  - dropkan_ps: only the spline term of each edge is gated (and scaled).
/// `rng` may be null when no mask is sampled; `frozen` supplies a fixed mask
/// instead of sampling (used by the enumeration and finite-difference
/// oracles).
Matrix layer_forward(const KanLayer& layer, const Matrix& input, bool training, Rng* rng,
                     LayerCache* cache = nullptr, const MaskTensor* frozen = nullptr);

struct KanNetwork {
    std::vector<KanLayer> layers;

    std::vector<std::size_t> architecture() const;
    std::size_t n_in() const { return layers.front().n_in; }
    std::size_t n_out() const { return layers.back().n_out; }
    std::size_t param_count() const;
};

struct ForwardResult {
    Matrix output;
    std::vector<LayerCache> caches;  // one per layer when caching is on
};

/// Evaluation-mode forward: no RNG, no cache.
Matrix network_eval(const KanNetwork& net, const Matrix& input);

/// Training-mode forward with per-layer caches for backprop. Masks are
/// sampled layer by layer in forward order from `rng`.
ForwardResult network_forward(const KanNetwork& net, const Matrix& input, bool training,
                              Rng* rng, bool want_cache = true);

/// Training-mode forward with caller-supplied masks (one entry per layer;
/// entries for layers without an active drop regime are ignored).
ForwardResult network_forward_frozen(const KanNetwork& net, const Matrix& input,
                                     const std::vector<MaskTensor>& masks);

struct GridSpec {
    int degree = 3;
    int intervals = 5;
    double lo = -1.0;
    double hi = 1.0;
};

struct NetworkInit {
    double sigma = 0.1;  // stddev of the spline coefficient init
    double w_b = 1.0;
    double w_s = 1.0;
};

/// Drop regime for a whole network. `rates` has one entry per maskable layer
/// (every layer except the last); a single entry is broadcast.
struct DropSpec {
    DropMode mode = DropMode::none;
    bool scale = false;
    std::vector<double> rates;
};

/// Build a network for `arch` = [n_0, ..., n_L]. The final layer never
/// carries a drop regime. Edge parameters are drawn in a fixed order
/// (layer, then j, then i, then coefficient index).
KanNetwork make_network(const std::vector<std::size_t>& arch, const GridSpec& grid,
                        const DropSpec& drop, const NetworkInit& init, Rng& rng);

/// Copy of `net` with every drop regime removed.
KanNetwork strip_drop(const KanNetwork& net);

/// Copy of `net` with `drop` applied to the maskable layers (all but the
/// last), weights untouched.
KanNetwork with_drop(const KanNetwork& net, const DropSpec& drop);

/// Parameters flattened in the documented order: layer, edge (j,i) row-major,
/// then [w_b, w_s, coeffs...] per edge.
std::vector<double> flatten_params(const KanNetwork& net);
void unflatten_params(KanNetwork& net, const std::vector<double>& params);

}  // namespace dropkan
