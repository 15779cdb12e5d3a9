#include "dropkan/layer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dropkan {

const char* drop_mode_name(DropMode mode) {
    switch (mode) {
        case DropMode::none: return "none";
        case DropMode::dropout: return "dropout";
        case DropMode::dropkan_pa: return "dropkan_pa";
        case DropMode::dropkan_ps: return "dropkan_ps";
    }
    return "none";
}

DropMode drop_mode_from_name(const std::string& name) {
    if (name == "none") return DropMode::none;
    if (name == "dropout") return DropMode::dropout;
    if (name == "dropkan_pa") return DropMode::dropkan_pa;
    if (name == "dropkan_ps") return DropMode::dropkan_ps;
    throw std::invalid_argument("unknown drop mode: " + name);
}

DropConfig::DropConfig(DropMode mode_, double rate_, bool scale_)
    : mode(mode_), rate(rate_), scale(scale_) {
    if (mode == DropMode::none) {
        // rate/scale are ignored for mode none; normalize them away.
        rate = 0.0;
        scale = false;
        return;
    }
    if (!(rate >= 0.0 && rate < 1.0))
        throw std::invalid_argument("DropConfig: rate must be in [0, 1), got " +
                                    std::to_string(rate_));
}

double MaskTensor::fraction_ones() const {
    if (values.empty()) return 0.0;
    std::size_t ones = 0;
    for (std::uint8_t v : values) ones += v;
    return static_cast<double>(ones) / static_cast<double>(values.size());
}

MaskTensor sample_mask(DropMode mode, double p, std::size_t batch, std::size_t n_out,
                       std::size_t n_in, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("sample_mask: p must be in [0, 1)");
    MaskTensor m;
    m.batch = batch;
    m.n_out = n_out;
    m.n_in = (mode == DropMode::dropout) ? 1 : n_in;
    m.values.resize(batch * n_out * m.n_in);
    // Fixed draw order: batch-major, then row-major over (j, i).
    const double keep = 1.0 - p;
    for (std::size_t idx = 0; idx < m.values.size(); ++idx)
        m.values[idx] = static_cast<std::uint8_t>(rng.bernoulli_keep(keep));
    return m;
}

KanLayer::KanLayer(std::size_t n_in_, std::size_t n_out_, EdgeGrid grid_, DropConfig drop_)
    : n_in(n_in_), n_out(n_out_), grid(std::move(grid_)), drop(drop_) {
    if (n_in == 0 || n_out == 0)
        throw std::invalid_argument("KanLayer: dimensions must be positive");
    edges.assign(n_in * n_out, EdgeActivation{1.0, 1.0, std::vector<double>(grid.basis_count(), 0.0)});
}

Matrix layer_forward(const KanLayer& layer, const Matrix& input, bool training, Rng* rng,
                     LayerCache* cache, const MaskTensor* frozen) {
    if (input.cols() != layer.n_in)
        throw std::invalid_argument("layer_forward: input width " + std::to_string(input.cols()) +
                                    " != n_in " + std::to_string(layer.n_in));
    for (std::size_t idx = 0; idx < input.data().size(); ++idx)
        if (!std::isfinite(input.data()[idx]))
            throw std::invalid_argument("layer_forward: non-finite input value");

    const std::size_t batch = input.rows();
    const std::size_t nb = layer.grid.basis_count();
    const bool active = training && layer.drop.mode != DropMode::none;

    MaskTensor local_mask;
    const MaskTensor* mask = nullptr;
    if (active) {
        if (frozen != nullptr) {
            mask = frozen;
            const std::size_t want_in = layer.drop.mode == DropMode::dropout ? 1 : layer.n_in;
            if (mask->batch != batch || mask->n_out != layer.n_out || mask->n_in != want_in)
                throw std::invalid_argument("layer_forward: frozen mask shape mismatch");
        } else {
            if (rng == nullptr)
                throw std::invalid_argument("layer_forward: active drop regime needs an rng");
            local_mask =
                sample_mask(layer.drop.mode, layer.drop.rate, batch, layer.n_out, layer.n_in, *rng);
            mask = &local_mask;
        }
    }

    const double f = layer.drop.factor();
    Matrix out(batch, layer.n_out);

    std::vector<double> basis_store;
    std::vector<double> basis_row(layer.n_in * nb);
    if (cache != nullptr) basis_store.resize(batch * layer.n_in * nb);
    std::vector<double> silu_row(layer.n_in);

    for (std::size_t b = 0; b < batch; ++b) {
        double* brow = cache ? basis_store.data() + b * layer.n_in * nb : basis_row.data();
        for (std::size_t i = 0; i < layer.n_in; ++i) {
            const double x = input(b, i);
            layer.grid.basis_eval(x, brow + i * nb);
            silu_row[i] = silu(x);
        }
        for (std::size_t j = 0; j < layer.n_out; ++j) {
            double acc = 0.0;
            const EdgeActivation* row = &layer.edges[j * layer.n_in];
            if (!active) {
                for (std::size_t i = 0; i < layer.n_in; ++i) {
                    const double* bi = brow + i * nb;
                    double sp = 0.0;
                    for (std::size_t c = 0; c < nb; ++c) sp += row[i].coeffs[c] * bi[c];
                    acc += row[i].w_b * silu_row[i] + row[i].w_s * sp;
                }
                out(b, j) = acc;
                continue;
            }
            switch (layer.drop.mode) {
                case DropMode::dropout:
                    for (std::size_t i = 0; i < layer.n_in; ++i) {
                        const double* bi = brow + i * nb;
                        double sp = 0.0;
                        for (std::size_t c = 0; c < nb; ++c) sp += row[i].coeffs[c] * bi[c];
                        acc += row[i].w_b * silu_row[i] + row[i].w_s * sp;
                    }
                    out(b, j) = mask->at(b, j) ? f * acc : 0.0;
                    break;
                case DropMode::dropkan_pa:
                    for (std::size_t i = 0; i < layer.n_in; ++i) {
                        if (!mask->at(b, j, i)) continue;
                        const double* bi = brow + i * nb;
                        double sp = 0.0;
                        for (std::size_t c = 0; c < nb; ++c) sp += row[i].coeffs[c] * bi[c];
                        acc += row[i].w_b * silu_row[i] + row[i].w_s * sp;
                    }
                    out(b, j) = f * acc;
                    break;
                case DropMode::dropkan_ps:
                    for (std::size_t i = 0; i < layer.n_in; ++i) {
                        const double* bi = brow + i * nb;
                        acc += row[i].w_b * silu_row[i];
                        if (!mask->at(b, j, i)) continue;
                        double sp = 0.0;
                        for (std::size_t c = 0; c < nb; ++c) sp += row[i].coeffs[c] * bi[c];
                        acc += f * (row[i].w_s * sp);
                    }
                    out(b, j) = acc;
                    break;
                case DropMode::none:
                    break;  // unreachable, handled above
            }
        }
    }

    if (cache != nullptr) {
        cache->input = input;
        cache->basis = std::move(basis_store);
        cache->drop_active = active;
        cache->mask = active ? *mask : MaskTensor{};
    }
    return out;
}

std::vector<std::size_t> KanNetwork::architecture() const {
    std::vector<std::size_t> arch;
    arch.reserve(layers.size() + 1);
    arch.push_back(layers.front().n_in);
    for (const KanLayer& l : layers) arch.push_back(l.n_out);
    return arch;
}

std::size_t KanNetwork::param_count() const {
    std::size_t n = 0;
    for (const KanLayer& l : layers) n += l.n_in * l.n_out * (2 + l.grid.basis_count());
    return n;
}

Matrix network_eval(const KanNetwork& net, const Matrix& input) {
    Matrix x = input;
    for (const KanLayer& l : net.layers) x = layer_forward(l, x, /*training=*/false, nullptr);
    return x;
}

ForwardResult network_forward(const KanNetwork& net, const Matrix& input, bool training,
                              Rng* rng, bool want_cache) {
    ForwardResult res;
    if (want_cache) res.caches.resize(net.layers.size());
    Matrix x = input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        LayerCache* cache = want_cache ? &res.caches[l] : nullptr;
        x = layer_forward(net.layers[l], x, training, rng, cache);
    }
    res.output = std::move(x);
    return res;
}

ForwardResult network_forward_frozen(const KanNetwork& net, const Matrix& input,
                                     const std::vector<MaskTensor>& masks) {
    if (masks.size() != net.layers.size())
        throw std::invalid_argument("network_forward_frozen: need one mask per layer");
    ForwardResult res;
    res.caches.resize(net.layers.size());
    Matrix x = input;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const MaskTensor* frozen = masks[l].empty() ? nullptr : &masks[l];
        x = layer_forward(net.layers[l], x, /*training=*/true, nullptr, &res.caches[l], frozen);
    }
    res.output = std::move(x);
    return res;
}

KanNetwork make_network(const std::vector<std::size_t>& arch, const GridSpec& grid,
                        const DropSpec& drop, const NetworkInit& init, Rng& rng) {
    if (arch.size() < 2)
        throw std::invalid_argument("make_network: architecture needs at least two entries");
    for (std::size_t n : arch)
        if (n == 0) throw std::invalid_argument("make_network: zero-width layer");

    const std::size_t n_layers = arch.size() - 1;
    const std::size_t n_maskable = n_layers - 1;
    std::vector<double> rates;
    if (drop.mode != DropMode::none && n_maskable > 0) {
        rates = drop.rates;
        if (rates.size() == 1 && n_maskable > 1) rates.assign(n_maskable, drop.rates[0]);
        if (rates.size() != n_maskable)
            throw std::invalid_argument("make_network: expected " + std::to_string(n_maskable) +
                                        " drop rates, got " + std::to_string(drop.rates.size()));
    }

    KanNetwork net;
    for (std::size_t l = 0; l < n_layers; ++l) {
        DropConfig cfg;  // final layer (and mode none) stays unmasked
        if (drop.mode != DropMode::none && l < n_maskable)
            cfg = DropConfig(drop.mode, rates[l], drop.scale);
        KanLayer layer(arch[l], arch[l + 1], EdgeGrid(grid.degree, grid.intervals, grid.lo, grid.hi),
                       cfg);
        for (std::size_t j = 0; j < layer.n_out; ++j) {
            for (std::size_t i = 0; i < layer.n_in; ++i) {
                EdgeActivation e = init_edge(layer.grid, init.sigma, rng);
                e.w_b = init.w_b;
                e.w_s = init.w_s;
                layer.edge(j, i) = std::move(e);
            }
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

KanNetwork strip_drop(const KanNetwork& net) {
    KanNetwork out = net;
    for (KanLayer& l : out.layers) l.drop = DropConfig{};
    return out;
}

KanNetwork with_drop(const KanNetwork& net, const DropSpec& drop) {
    KanNetwork out = strip_drop(net);
    if (drop.mode == DropMode::none) return out;
    const std::size_t n_maskable = out.layers.size() - 1;
    if (n_maskable == 0) return out;
    std::vector<double> rates = drop.rates;
    if (rates.size() == 1 && n_maskable > 1) rates.assign(n_maskable, drop.rates[0]);
    if (rates.size() != n_maskable)
        throw std::invalid_argument("with_drop: expected " + std::to_string(n_maskable) +
                                    " drop rates, got " + std::to_string(drop.rates.size()));
    for (std::size_t l = 0; l < n_maskable; ++l)
        out.layers[l].drop = DropConfig(drop.mode, rates[l], drop.scale);
    return out;
}

std::vector<double> flatten_params(const KanNetwork& net) {
    std::vector<double> p;
    p.reserve(net.param_count());
    for (const KanLayer& l : net.layers) {
        for (const EdgeActivation& e : l.edges) {
            p.push_back(e.w_b);
            p.push_back(e.w_s);
            p.insert(p.end(), e.coeffs.begin(), e.coeffs.end());
        }
    }
    return p;
}

void unflatten_params(KanNetwork& net, const std::vector<double>& params) {
    if (params.size() != net.param_count())
        throw std::invalid_argument("unflatten_params: size mismatch");
    std::size_t idx = 0;
    for (KanLayer& l : net.layers) {
        for (EdgeActivation& e : l.edges) {
            e.w_b = params[idx++];
            e.w_s = params[idx++];
            for (double& c : e.coeffs) c = params[idx++];
        }
    }
}

}  // namespace dropkan
