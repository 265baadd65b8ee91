#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedward/data.hpp"
#include "fedward/update.hpp"

namespace fedward {

enum class ModelKind { linear, mlp };

/// Multinomial logistic regression (layers w0 [C,in], b0 [C]) or a
/// one-hidden-layer tanh MLP (w0 [H,in], b0 [H], w1 [C,H], b1 [C]).
struct ModelSpec {
    ModelKind kind = ModelKind::linear;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;  // mlp only
    int classes = 2;
};

struct TrainConfig {
    double lr = 0.01;
    std::size_t batch_size = 32;
    std::size_t local_epochs = 1;  // boosted by ALA-style attacks
    std::uint64_t seed = 0;
};

void validate(const ModelSpec& spec);

/// Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
LayeredUpdate init_params(const ModelSpec& spec, std::uint64_t seed);

std::vector<double> logits(const ModelSpec& spec, const LayeredUpdate& params,
                           std::span<const double> x);

/// Numerically stable softmax; outputs sum to 1.
std::vector<double> softmax(std::span<const double> z);

/// Mean softmax cross-entropy over the examples.
double cross_entropy_loss(const ModelSpec& spec, const LayeredUpdate& params,
                          std::span<const LabeledExample> examples);

/// Mean analytic gradient of cross_entropy_loss with the same layer structure
/// as the parameters.
LayeredUpdate loss_gradient(const ModelSpec& spec, const LayeredUpdate& params,
                            std::span<const LabeledExample> examples);

/// Seeded-shuffle mini-batch SGD for cfg.local_epochs passes; returns the
/// parameter delta (trained - initial), not the trained parameters.
LayeredUpdate local_update(const ModelSpec& spec, const LayeredUpdate& params,
                           std::span<const LabeledExample> data, const TrainConfig& cfg);

/// Argmax class; ties break toward the lowest class index.
int predict(const ModelSpec& spec, const LayeredUpdate& params, std::span<const double> x);

/// Main-task accuracy: fraction of test examples classified correctly.
double evaluate_ma(const ModelSpec& spec, const LayeredUpdate& params,
                   std::span<const LabeledExample> test_data);

/// Attack success rate: stamps the assembled global trigger on every test
/// example whose true label differs from the target, then measures the
/// fraction predicted as the target label. Throws when no such example exists.
double evaluate_asr(const ModelSpec& spec, const LayeredUpdate& params,
                    std::span<const LabeledExample> test_data, const TriggerSpec& trigger,
                    std::size_t rows, std::size_t cols);

}  // namespace fedward
