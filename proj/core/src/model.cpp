#include "fedward/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedward/rng.hpp"

namespace fedward {

void validate(const ModelSpec& spec) {
    if (spec.input_dim == 0) throw std::invalid_argument("model: input_dim must be positive");
    if (spec.classes < 2) throw std::invalid_argument("model: need at least 2 classes");
    if (spec.kind == ModelKind::mlp && spec.hidden_dim == 0)
        throw std::invalid_argument("model: mlp needs a positive hidden_dim");
}

LayeredUpdate init_params(const ModelSpec& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    const std::size_t C = static_cast<std::size_t>(spec.classes);

    auto weight_layer = [&](const std::string& name, std::size_t out_dim, std::size_t in_dim) {
        Layer l;
        l.name = name;
        l.shape = {out_dim, in_dim};
        l.values.resize(out_dim * in_dim);
        double s = 1.0 / std::sqrt(static_cast<double>(in_dim));
        for (double& v : l.values) v = rng.uniform(-s, s);
        return l;
    };
    auto bias_layer = [](const std::string& name, std::size_t dim) {
        Layer l;
        l.name = name;
        l.shape = {dim};
        l.values.assign(dim, 0.0);
        return l;
    };

    LayeredUpdate p;
    if (spec.kind == ModelKind::linear) {
        p.layers.push_back(weight_layer("w0", C, spec.input_dim));
        p.layers.push_back(bias_layer("b0", C));
    } else {
        p.layers.push_back(weight_layer("w0", spec.hidden_dim, spec.input_dim));
        p.layers.push_back(bias_layer("b0", spec.hidden_dim));
        p.layers.push_back(weight_layer("w1", C, spec.hidden_dim));
        p.layers.push_back(bias_layer("b1", C));
    }
    return p;
}

namespace {

// z = W x + b with W given row-major [out, in].
void affine(const std::vector<double>& w, const std::vector<double>& b,
            std::span<const double> x, std::vector<double>& out) {
    const std::size_t out_dim = b.size();
    const std::size_t in_dim = x.size();
    out.resize(out_dim);
    for (std::size_t r = 0; r < out_dim; ++r) {
        double acc = b[r];
        const double* wr = w.data() + r * in_dim;
        for (std::size_t c = 0; c < in_dim; ++c) acc += wr[c] * x[c];
        out[r] = acc;
    }
}

struct Forward {
    std::vector<double> hidden;  // tanh activations (mlp only)
    std::vector<double> logits;
};

Forward forward_pass(const ModelSpec& spec, const LayeredUpdate& p, std::span<const double> x) {
    Forward f;
    if (spec.kind == ModelKind::linear) {
        affine(p.layers[0].values, p.layers[1].values, x, f.logits);
    } else {
        affine(p.layers[0].values, p.layers[1].values, x, f.hidden);
        for (double& h : f.hidden) h = std::tanh(h);
        affine(p.layers[2].values, p.layers[3].values, f.hidden, f.logits);
    }
    return f;
}

// Accumulates the per-example gradient into grad (same structure as params).
void accumulate_gradient(const ModelSpec& spec, const LayeredUpdate& p,
                         const LabeledExample& ex, LayeredUpdate& grad) {
    Forward f = forward_pass(spec, p, ex.features);
    std::vector<double> delta = softmax(f.logits);
    delta[static_cast<std::size_t>(ex.label)] -= 1.0;  // dL/dlogits

    if (spec.kind == ModelKind::linear) {
        auto& gw = grad.layers[0].values;
        auto& gb = grad.layers[1].values;
        const std::size_t in_dim = ex.features.size();
        for (std::size_t r = 0; r < delta.size(); ++r) {
            for (std::size_t c = 0; c < in_dim; ++c) gw[r * in_dim + c] += delta[r] * ex.features[c];
            gb[r] += delta[r];
        }
        return;
    }

    const std::size_t hid = f.hidden.size();
    const std::size_t in_dim = ex.features.size();
    auto& gw0 = grad.layers[0].values;
    auto& gb0 = grad.layers[1].values;
    auto& gw1 = grad.layers[2].values;
    auto& gb1 = grad.layers[3].values;
    const auto& w1 = p.layers[2].values;

    std::vector<double> dhidden(hid, 0.0);
    for (std::size_t r = 0; r < delta.size(); ++r) {
        for (std::size_t h = 0; h < hid; ++h) {
            gw1[r * hid + h] += delta[r] * f.hidden[h];
            dhidden[h] += w1[r * hid + h] * delta[r];
        }
        gb1[r] += delta[r];
    }
    for (std::size_t h = 0; h < hid; ++h) {
        double dz = dhidden[h] * (1.0 - f.hidden[h] * f.hidden[h]);  // tanh'
        for (std::size_t c = 0; c < in_dim; ++c) gw0[h * in_dim + c] += dz * ex.features[c];
        gb0[h] += dz;
    }
}

}  // namespace

std::vector<double> logits(const ModelSpec& spec, const LayeredUpdate& params,
                           std::span<const double> x) {
    if (x.size() != spec.input_dim) throw std::invalid_argument("logits: input size mismatch");
    return forward_pass(spec, params, x).logits;
}

std::vector<double> softmax(std::span<const double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> p(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp(z[i] - zmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double cross_entropy_loss(const ModelSpec& spec, const LayeredUpdate& params,
                          std::span<const LabeledExample> examples) {
    if (examples.empty()) throw std::invalid_argument("cross_entropy_loss: empty example set");
    double total = 0.0;
    for (const auto& ex : examples) {
        auto z = forward_pass(spec, params, ex.features).logits;
        double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double v : z) sum += std::exp(v - zmax);
        total += std::log(sum) - (z[static_cast<std::size_t>(ex.label)] - zmax);
    }
    return total / static_cast<double>(examples.size());
}

LayeredUpdate loss_gradient(const ModelSpec& spec, const LayeredUpdate& params,
                            std::span<const LabeledExample> examples) {
    if (examples.empty()) throw std::invalid_argument("loss_gradient: empty example set");
    LayeredUpdate grad = zeros_like(params);
    for (const auto& ex : examples) accumulate_gradient(spec, params, ex, grad);
    double inv = 1.0 / static_cast<double>(examples.size());
    for (auto& l : grad.layers)
        for (double& v : l.values) v *= inv;
    return grad;
}

LayeredUpdate local_update(const ModelSpec& spec, const LayeredUpdate& params,
                           std::span<const LabeledExample> data, const TrainConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("local_update: empty training data");
    if (cfg.batch_size == 0) throw std::invalid_argument("local_update: batch_size must be > 0");

    LayeredUpdate current = params;
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<LabeledExample> batch;
    batch.reserve(cfg.batch_size);
    for (std::size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(start + cfg.batch_size, order.size());
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            LayeredUpdate grad = loss_gradient(spec, current, batch);
            current = axpy(-cfg.lr, grad, current);
        }
    }
    return axpy(-1.0, params, current);  // trained - initial
}

int predict(const ModelSpec& spec, const LayeredUpdate& params, std::span<const double> x) {
    auto z = logits(spec, params, x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < z.size(); ++i)
        if (z[i] > z[best]) best = i;  // strict: ties keep the lowest index
    return static_cast<int>(best);
}

double evaluate_ma(const ModelSpec& spec, const LayeredUpdate& params,
                   std::span<const LabeledExample> test_data) {
    if (test_data.empty()) throw std::invalid_argument("evaluate_ma: empty test set");
    std::size_t correct = 0;
    for (const auto& ex : test_data)
        if (predict(spec, params, ex.features) == ex.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(test_data.size());
}

double evaluate_asr(const ModelSpec& spec, const LayeredUpdate& params,
                    std::span<const LabeledExample> test_data, const TriggerSpec& trigger,
                    std::size_t rows, std::size_t cols) {
    if (test_data.empty()) throw std::invalid_argument("evaluate_asr: empty test set");
    std::size_t hits = 0, considered = 0;
    for (const auto& ex : test_data) {
        if (ex.label == trigger.target_label) continue;
        LabeledExample stamped = apply_global_trigger(ex, trigger, rows, cols);
        ++considered;
        if (predict(spec, params, stamped.features) == trigger.target_label) ++hits;
    }
    if (considered == 0)
        throw std::invalid_argument("evaluate_asr: every test example already has the target label");
    return static_cast<double>(hits) / static_cast<double>(considered);
}

}  // namespace fedward
