#include "dropkan/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace dropkan {

namespace {

bool any_mask(const std::vector<MaskTensor>& masks) {
    for (const MaskTensor& m : masks)
        if (!m.empty()) return true;
    return false;
}

ForwardResult forward_for_check(const KanNetwork& net, const std::vector<MaskTensor>& masks,
                                const Matrix& input) {
    if (!masks.empty() && any_mask(masks)) return network_forward_frozen(net, input, masks);
    return network_forward(net, input, /*training=*/true, nullptr);
}

}  // namespace

double masked_loss(const KanNetwork& net, const std::vector<MaskTensor>& masks,
                   const Matrix& input, const std::vector<int>& labels, LossKind loss) {
    const ForwardResult fwd = forward_for_check(net, masks, input);
    return loss_eval(fwd.output, labels, loss).loss;
}

std::vector<double> finite_difference_gradients(const KanNetwork& net,
                                                const std::vector<MaskTensor>& masks,
                                                const Matrix& input,
                                                const std::vector<int>& labels, LossKind loss,
                                                double h) {
    KanNetwork probe = net;
    std::vector<double> params = flatten_params(probe);
    std::vector<double> grads(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        unflatten_params(probe, params);
        const double up = masked_loss(probe, masks, input, labels, loss);
        params[i] = saved - h;
        unflatten_params(probe, params);
        const double down = masked_loss(probe, masks, input, labels, loss);
        params[i] = saved;
        grads[i] = (up - down) / (2.0 * h);
    }
    unflatten_params(probe, params);
    return grads;
}

std::vector<double> analytic_gradients(const KanNetwork& net,
                                       const std::vector<MaskTensor>& masks, const Matrix& input,
                                       const std::vector<int>& labels, LossKind loss) {
    const ForwardResult fwd = forward_for_check(net, masks, input);
    const LossResult lr = loss_eval(fwd.output, labels, loss);
    return backward(net, fwd, lr.output_grad).flatten(net);
}

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                          double floor) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double mag = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        if (std::abs(a[i]) < floor && std::abs(b[i]) < floor) continue;
        worst = std::max(worst, std::abs(a[i] - b[i]) / mag);
    }
    return worst;
}

std::vector<MaskTensor> sample_network_masks(const KanNetwork& net, std::size_t batch, Rng& rng) {
    std::vector<MaskTensor> masks(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const KanLayer& layer = net.layers[l];
        if (layer.drop.mode == DropMode::none) continue;
        masks[l] = sample_mask(layer.drop.mode, layer.drop.rate, batch, layer.n_out, layer.n_in, rng);
    }
    return masks;
}

}  // namespace dropkan
