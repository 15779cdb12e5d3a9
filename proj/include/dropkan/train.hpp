#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dropkan/autograd.hpp"
#include "dropkan/layer.hpp"
#include "dropkan/matrix.hpp"

namespace dropkan {

enum class LossKind { softmax_cross_entropy, binary_logistic };

const char* loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

struct LossResult {
    double loss = 0.0;
    Matrix output_grad;  // dLoss/dLogits, already averaged over the batch
};

/// Mean loss over the batch and its gradient w.r.t. the logits.
/// softmax_cross_entropy expects logits (batch x C), labels in [0, C).
/// binary_logistic expects logits (batch x 1), labels in {0, 1}.
LossResult loss_eval(const Matrix& logits, const std::vector<int>& labels, LossKind kind);

/// Thrown when a training step produces a non-finite loss or gradient.
class TrainAbort : public std::runtime_error {
public:
    TrainAbort(std::size_t step, const std::string& what)
        : std::runtime_error("training aborted at step " + std::to_string(step) + ": " + what),
          step_(step) {}
    std::size_t step() const { return step_; }

private:
    std::size_t step_;
};

struct AdamConfig {
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction over a flat parameter vector.
class AdamState {
public:
    explicit AdamState(std::size_t n_params) : m_(n_params, 0.0), v_(n_params, 0.0) {}

    std::uint64_t step_count() const { return t_; }

    /// One update, in place. Rejects non-finite gradients.
    void step(std::vector<double>& params, const std::vector<double>& grads,
              const AdamConfig& cfg);

private:
    std::vector<double> m_;
    std::vector<double> v_;
    std::uint64_t t_ = 0;
};

struct TrainConfig {
    std::size_t steps = 2000;
    std::size_t batch_size = 32;
    AdamConfig adam;  // learning rate defaults to 0.01
    std::uint64_t seed = 0;
    LossKind loss = LossKind::softmax_cross_entropy;
    std::size_t eval_every = 100;  // validation metric cadence, in steps

    void validate() const;
};

struct MetricRecord {
    std::size_t step = 0;
    std::string split;  // "train" | "valid" | "test"
    double loss = 0.0;
    double accuracy = 0.0;
    double wall_time = 0.0;  // seconds since run start; excluded from determinism checks
};

struct MetricLog {
    std::vector<MetricRecord> records;

    /// Equality of everything except wall_time.
    bool same_metrics(const MetricLog& other) const;
    std::string to_jsonl() const;
};

struct SplitData {
    Matrix features;
    std::vector<int> labels;
};

struct TrainResult {
    KanNetwork net;
    MetricLog log;
};

/// Argmax accuracy (ties toward the lowest class index) and mean loss on a
/// split, using evaluation-mode forward.
std::pair<double, double> evaluate(const KanNetwork& net, const SplitData& split, LossKind kind);

/// Called at every metric-log point with the current step and network.
using EvalCallback = std::function<void(std::size_t, const KanNetwork&)>;

/// Minibatch training: per epoch the training set is shuffled with the run's
/// PRNG and consumed in order (final short batch kept), for exactly
/// cfg.steps updates. Validation metrics are logged at step 0, every
/// cfg.eval_every steps and at the final step. Fully reproducible from
/// cfg.seed.
TrainResult train(KanNetwork net, const SplitData& train_split, const SplitData& valid_split,
                  const TrainConfig& cfg, const EvalCallback& on_eval = {});

}  // namespace dropkan
