#pragma once

#include <vector>

#include "dropkan/layer.hpp"
#include "dropkan/matrix.hpp"

namespace dropkan {

/// Partials of the loss w.r.t. one layer's parameters. Shapes mirror the
/// layer: d_wb/d_ws are (n_out x n_in), d_coeffs is (n_out x n_in x nb)
/// flattened in the same row-major order as KanLayer::edges.
struct LayerGrads {
    Matrix d_wb;
    Matrix d_ws;
    std::vector<double> d_coeffs;

    double* d_coeffs_at(std::size_t j, std::size_t i, std::size_t n_in, std::size_t nb) {
        return d_coeffs.data() + (j * n_in + i) * nb;
    }
    const double* d_coeffs_at(std::size_t j, std::size_t i, std::size_t n_in,
                              std::size_t nb) const {
        return d_coeffs.data() + (j * n_in + i) * nb;
    }
};

struct GradientSet {
    std::vector<LayerGrads> layers;
    Matrix d_input;  // batch x n_0, gradient w.r.t. the network input

    /// Same order as flatten_params.
    std::vector<double> flatten(const KanNetwork& net) const;
    bool all_finite() const;
};

/// Exact reverse-mode gradients of a scalar loss through the cached forward.
/// `output_grad` is dLoss/dOutput (batch x n_L). Mask semantics:
///  - dropkan_pa: a masked edge contributes zero gradient to its w_b, w_s
///    and coeffs;
///  - dropkan_ps: a masked spline term contributes zero gradient to w_s and
///    coeffs but the silu path still reaches w_b;
///  - dropout: a dropped node zeroes the gradient into its incoming edges;
///    its outgoing edges still receive gradient through phi'(0).
GradientSet backward(const KanNetwork& net, const ForwardResult& fwd, const Matrix& output_grad);

}  // namespace dropkan
