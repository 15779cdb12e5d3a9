#include "dropkan/autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace dropkan {

std::vector<double> GradientSet::flatten(const KanNetwork& net) const {
    std::vector<double> g;
    g.reserve(net.param_count());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const KanLayer& layer = net.layers[l];
        const LayerGrads& lg = layers[l];
        const std::size_t nb = layer.grid.basis_count();
        for (std::size_t j = 0; j < layer.n_out; ++j) {
            for (std::size_t i = 0; i < layer.n_in; ++i) {
                g.push_back(lg.d_wb(j, i));
                g.push_back(lg.d_ws(j, i));
                const double* dc = lg.d_coeffs_at(j, i, layer.n_in, nb);
                g.insert(g.end(), dc, dc + nb);
            }
        }
    }
    return g;
}

bool GradientSet::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        for (double x : v)
            if (!std::isfinite(x)) return false;
        return true;
    };
    for (const LayerGrads& lg : layers)
        if (!finite(lg.d_wb.data()) || !finite(lg.d_ws.data()) || !finite(lg.d_coeffs))
            return false;
    return finite(d_input.data());
}

GradientSet backward(const KanNetwork& net, const ForwardResult& fwd, const Matrix& output_grad) {
    if (fwd.caches.size() != net.layers.size())
        throw std::invalid_argument("backward: forward cache does not match the network");
    if (output_grad.cols() != net.n_out())
        throw std::invalid_argument("backward: output_grad width mismatch");

    GradientSet grads;
    grads.layers.resize(net.layers.size());

    // Gradient flowing into the current layer's output, batch x n_out.
    Matrix g_out = output_grad;

    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const KanLayer& layer = net.layers[li];
        const LayerCache& cache = fwd.caches[li];
        if (cache.input.rows() != g_out.rows() || cache.input.cols() != layer.n_in)
            throw std::invalid_argument("backward: cache shape mismatch at layer " +
                                        std::to_string(li));

        const std::size_t batch = cache.input.rows();
        const std::size_t nb = layer.grid.basis_count();
        const bool active = cache.drop_active;
        const double f = layer.drop.factor();

        LayerGrads& lg = grads.layers[li];
        lg.d_wb = Matrix(layer.n_out, layer.n_in);
        lg.d_ws = Matrix(layer.n_out, layer.n_in);
        lg.d_coeffs.assign(layer.n_out * layer.n_in * nb, 0.0);
        Matrix g_in(batch, layer.n_in);

        std::vector<double> basis_deriv_row(nb);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t i = 0; i < layer.n_in; ++i) {
                const double x = cache.input(b, i);
                const double silu_x = silu(x);
                const double dsilu_x = silu_deriv(x);
                const double* bi = cache.basis_at(b, i, layer.n_in, nb);
                layer.grid.basis_deriv(x, basis_deriv_row.data());

                double gx = 0.0;  // accumulates dL/dx_(b,i)
                for (std::size_t j = 0; j < layer.n_out; ++j) {
                    const EdgeActivation& e = layer.edge(j, i);
                    // Gradient reaching this node's sum.
                    double gj = g_out(b, j);
                    if (active && layer.drop.mode == DropMode::dropout)
                        gj = cache.mask.at(b, j) ? gj * f : 0.0;

                    double sp = 0.0, dsp = 0.0;
                    for (std::size_t c = 0; c < nb; ++c) {
                        sp += e.coeffs[c] * bi[c];
                        dsp += e.coeffs[c] * basis_deriv_row[c];
                    }

                    double g_base = gj;    // gradient on the w_b*silu term
                    double g_spline = gj;  // gradient on the w_s*spline term
                    if (active) {
                        switch (layer.drop.mode) {
                            case DropMode::dropkan_pa: {
                                const double m = cache.mask.at(b, j, i) ? f : 0.0;
                                g_base = gj * m;
                                g_spline = gj * m;
                                break;
                            }
                            case DropMode::dropkan_ps: {
                                const double m = cache.mask.at(b, j, i) ? f : 0.0;
                                g_spline = gj * m;  // silu path stays unmasked
                                break;
                            }
                            default:
                                break;  // dropout already folded into gj
                        }
                    }

                    lg.d_wb(j, i) += g_base * silu_x;
                    lg.d_ws(j, i) += g_spline * sp;
                    if (g_spline != 0.0) {
                        double* dc = lg.d_coeffs_at(j, i, layer.n_in, nb);
                        const double gw = g_spline * e.w_s;
                        for (std::size_t c = 0; c < nb; ++c) dc[c] += gw * bi[c];
                    }
                    gx += g_base * e.w_b * dsilu_x + g_spline * e.w_s * dsp;
                }
                g_in(b, i) = gx;
            }
        }
        g_out = std::move(g_in);
    }

    grads.d_input = std::move(g_out);
    return grads;
}

}  // namespace dropkan
