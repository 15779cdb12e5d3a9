#pragma once

#include <vector>

#include "dropkan/layer.hpp"
#include "dropkan/train.hpp"

namespace dropkan {

/// Loss of the network on (input, labels) under frozen masks. Masks may be
/// empty (plain training-mode forward on a drop-free net, or eval).
double masked_loss(const KanNetwork& net, const std::vector<MaskTensor>& masks,
                   const Matrix& input, const std::vector<int>& labels, LossKind loss);

/// Central finite differences of masked_loss w.r.t. every parameter, in
/// flatten_params order.
std::vector<double> finite_difference_gradients(const KanNetwork& net,
                                                const std::vector<MaskTensor>& masks,
                                                const Matrix& input,
                                                const std::vector<int>& labels, LossKind loss,
                                                double h);

/// Analytic gradients of masked_loss via backward, same order.
std::vector<double> analytic_gradients(const KanNetwork& net,
                                       const std::vector<MaskTensor>& masks, const Matrix& input,
                                       const std::vector<int>& labels, LossKind loss);

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). Entries where both sides
/// are below `floor` are skipped.
double max_relative_error(const std::vector<double>& a, const std::vector<double>& b,
                          double floor = 1e-8);

/// Sample a frozen mask for every layer with an active drop regime.
std::vector<MaskTensor> sample_network_masks(const KanNetwork& net, std::size_t batch, Rng& rng);

}  // namespace dropkan
