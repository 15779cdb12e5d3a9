#include "dropkan/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace dropkan {

const char* loss_kind_name(LossKind k) {
    return k == LossKind::softmax_cross_entropy ? "softmax_cross_entropy" : "binary_logistic";
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "softmax_cross_entropy") return LossKind::softmax_cross_entropy;
    if (name == "binary_logistic") return LossKind::binary_logistic;
    throw std::invalid_argument("unknown loss kind: " + name);
}

LossResult loss_eval(const Matrix& logits, const std::vector<int>& labels, LossKind kind) {
    const std::size_t batch = logits.rows();
    if (labels.size() != batch)
        throw std::invalid_argument("loss_eval: labels/logits batch mismatch");
    if (batch == 0) throw std::invalid_argument("loss_eval: empty batch");

    LossResult res;
    res.output_grad = Matrix(batch, logits.cols());
    const double inv_batch = 1.0 / static_cast<double>(batch);

    if (kind == LossKind::binary_logistic) {
        if (logits.cols() != 1)
            throw std::invalid_argument("loss_eval: binary_logistic needs one logit per sample");
        double total = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            const int y = labels[b];
            if (y != 0 && y != 1)
                throw std::invalid_argument("loss_eval: binary label out of range");
            const double z = logits(b, 0);
            // softplus(z) - y*z, computed stably
            total += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
            const double sig = 1.0 / (1.0 + std::exp(-z));
            res.output_grad(b, 0) = (sig - y) * inv_batch;
        }
        res.loss = total * inv_batch;
        return res;
    }

    const std::size_t n_classes = logits.cols();
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
        const int y = labels[b];
        if (y < 0 || static_cast<std::size_t>(y) >= n_classes)
            throw std::invalid_argument("loss_eval: label " + std::to_string(y) +
                                        " out of range for " + std::to_string(n_classes) +
                                        " classes");
        double zmax = logits(b, 0);
        for (std::size_t c = 1; c < n_classes; ++c) zmax = std::max(zmax, logits(b, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) sum += std::exp(logits(b, c) - zmax);
        const double lse = zmax + std::log(sum);
        total += lse - logits(b, static_cast<std::size_t>(y));
        for (std::size_t c = 0; c < n_classes; ++c) {
            const double p = std::exp(logits(b, c) - lse);
            res.output_grad(b, c) = (p - (static_cast<std::size_t>(y) == c ? 1.0 : 0.0)) * inv_batch;
        }
    }
    res.loss = total * inv_batch;
    return res;
}

void AdamState::step(std::vector<double>& params, const std::vector<double>& grads,
                     const AdamConfig& cfg) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw std::invalid_argument("AdamState::step: size mismatch");
    for (double g : grads)
        if (!std::isfinite(g)) throw std::runtime_error("AdamState::step: non-finite gradient");

    t_ += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * grads[i];
        v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
}

void TrainConfig::validate() const {
    if (steps == 0) throw std::invalid_argument("TrainConfig: steps must be > 0");
    if (batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be > 0");
    if (!(adam.learning_rate > 0.0))
        throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (eval_every == 0) throw std::invalid_argument("TrainConfig: eval_every must be > 0");
}

bool MetricLog::same_metrics(const MetricLog& other) const {
    if (records.size() != other.records.size()) return false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const MetricRecord& a = records[i];
        const MetricRecord& b = other.records[i];
        if (a.step != b.step || a.split != b.split) return false;
        if (std::bit_cast<std::uint64_t>(a.loss) != std::bit_cast<std::uint64_t>(b.loss))
            return false;
        if (std::bit_cast<std::uint64_t>(a.accuracy) != std::bit_cast<std::uint64_t>(b.accuracy))
            return false;
    }
    return true;
}

std::string MetricLog::to_jsonl() const {
    std::ostringstream out;
    for (const MetricRecord& r : records) {
        nlohmann::json j{{"step", r.step},
                         {"split", r.split},
                         {"loss", r.loss},
                         {"accuracy", r.accuracy},
                         {"wall_time", r.wall_time}};
        out << j.dump() << '\n';
    }
    return out.str();
}

std::pair<double, double> evaluate(const KanNetwork& net, const SplitData& split, LossKind kind) {
    if (split.features.rows() == 0) throw std::invalid_argument("evaluate: empty split");
    const Matrix logits = network_eval(net, split.features);
    const LossResult lr = loss_eval(logits, split.labels, kind);

    std::size_t correct = 0;
    for (std::size_t b = 0; b < logits.rows(); ++b) {
        std::size_t pred = 0;
        if (kind == LossKind::binary_logistic) {
            pred = logits(b, 0) > 0.0 ? 1 : 0;
        } else {
            double best = logits(b, 0);
            for (std::size_t c = 1; c < logits.cols(); ++c) {
                if (logits(b, c) > best) {  // strict: ties stay at the lowest index
                    best = logits(b, c);
                    pred = c;
                }
            }
        }
        if (pred == static_cast<std::size_t>(split.labels[b])) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(logits.rows());
    return {acc, lr.loss};
}

TrainResult train(KanNetwork net, const SplitData& train_split, const SplitData& valid_split,
                  const TrainConfig& cfg, const EvalCallback& on_eval) {
    cfg.validate();
    if (train_split.features.rows() == 0) throw std::invalid_argument("train: empty training split");
    if (train_split.features.cols() != net.n_in())
        throw std::invalid_argument("train: feature width does not match the network input");

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&t0]() {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    Rng rng(cfg.seed);
    AdamState adam(net.param_count());
    MetricLog log;

    auto log_valid = [&](std::size_t step) {
        if (valid_split.features.rows() > 0) {
            auto [acc, loss] = evaluate(net, valid_split, cfg.loss);
            log.records.push_back({step, "valid", loss, acc, elapsed()});
        }
        if (on_eval) on_eval(step, net);
    };
    log_valid(0);

    const std::size_t n = train_split.features.rows();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = n;  // forces a shuffle before the first batch

    std::vector<double> params = flatten_params(net);
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        if (cursor >= n) {
            rng.shuffle(order);
            cursor = 0;
        }
        const std::size_t take = std::min(cfg.batch_size, n - cursor);
        Matrix xb(take, train_split.features.cols());
        std::vector<int> yb(take);
        for (std::size_t r = 0; r < take; ++r) {
            const std::size_t src = order[cursor + r];
            for (std::size_t c = 0; c < xb.cols(); ++c) xb(r, c) = train_split.features(src, c);
            yb[r] = train_split.labels[src];
        }
        cursor += take;

        const ForwardResult fwd = network_forward(net, xb, /*training=*/true, &rng);
        const LossResult lr = loss_eval(fwd.output, yb, cfg.loss);
        if (!std::isfinite(lr.loss)) throw TrainAbort(step, "non-finite loss");
        const GradientSet grads = backward(net, fwd, lr.output_grad);
        try {
            adam.step(params, grads.flatten(net), cfg.adam);
        } catch (const std::runtime_error& e) {
            throw TrainAbort(step, e.what());
        }
        unflatten_params(net, params);

        if (step % cfg.eval_every == 0 || step == cfg.steps) log_valid(step);
    }

    return {std::move(net), std::move(log)};
}

}  // namespace dropkan
