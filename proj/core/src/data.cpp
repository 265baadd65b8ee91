#include "fedward/data.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "fedward/rng.hpp"

namespace fedward {

void validate_trigger(const TriggerSpec& trigger, std::size_t rows, std::size_t cols) {
    if (trigger.anchors.empty())
        throw std::invalid_argument("trigger: anchor list must be non-empty");
    if (trigger.patch_rows == 0 || trigger.patch_cols == 0)
        throw std::invalid_argument("trigger: patch size must be positive");
    if (trigger.patch_value < 0.0 || trigger.patch_value > 1.0)
        throw std::invalid_argument("trigger: patch value must be in [0,1]");
    for (const auto& [r, c] : trigger.anchors) {
        if (r + trigger.patch_rows > rows || c + trigger.patch_cols > cols)
            throw std::invalid_argument("trigger: patch out of image bounds");
    }
}

TriggerSpec default_corner_trigger(std::size_t rows, std::size_t cols) {
    TriggerSpec t;
    t.patch_rows = 2;
    t.patch_cols = 2;
    t.patch_value = 1.0;
    t.target_label = 0;
    t.anchors = {{0, 0},
                 {0, cols - t.patch_cols},
                 {rows - t.patch_rows, 0},
                 {rows - t.patch_rows, cols - t.patch_cols}};
    validate_trigger(t, rows, cols);
    return t;
}

std::vector<LabeledExample> gen_synthetic(int classes, std::size_t per_class,
                                          std::size_t rows, std::size_t cols,
                                          double noise_sigma, std::uint64_t seed) {
    if (classes < 2) throw std::invalid_argument("gen_synthetic: need at least 2 classes");
    if (per_class < 1) throw std::invalid_argument("gen_synthetic: per_class must be >= 1");
    if (rows == 0 || cols == 0) throw std::invalid_argument("gen_synthetic: invalid dims");

    const std::size_t dim = rows * cols;
    std::vector<LabeledExample> out;
    out.reserve(static_cast<std::size_t>(classes) * per_class);

    for (int c = 0; c < classes; ++c) {
        Rng mean_rng(derive_seed(seed, 0x6d65616e, static_cast<std::uint64_t>(c)));
        std::vector<double> mean(dim);
        for (double& v : mean) v = mean_rng.uniform(0.2, 0.8);

        Rng noise_rng(derive_seed(seed, 0x6e6f6973, static_cast<std::uint64_t>(c)));
        for (std::size_t k = 0; k < per_class; ++k) {
            LabeledExample ex;
            ex.label = c;
            ex.features.resize(dim);
            for (std::size_t j = 0; j < dim; ++j)
                ex.features[j] = std::clamp(mean[j] + noise_sigma * noise_rng.normal(), 0.0, 1.0);
            out.push_back(std::move(ex));
        }
    }
    return out;
}

std::vector<std::vector<LabeledExample>> partition_noniid(
    const std::vector<LabeledExample>& data, const PartitionSpec& spec,
    std::vector<std::string>* warnings) {
    if (data.empty()) throw std::invalid_argument("partition_noniid: empty data");
    if (spec.n_clients < 2) throw std::invalid_argument("partition_noniid: need >= 2 clients");
    if (spec.nir < 0.0 || spec.nir > 1.0)
        throw std::invalid_argument("partition_noniid: nir must be in [0,1]");
    if (spec.classes < 1) throw std::invalid_argument("partition_noniid: classes must be >= 1");

    Rng rng(spec.seed);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<std::deque<std::size_t>> by_class(static_cast<std::size_t>(spec.classes));
    for (std::size_t idx : order) {
        int label = data[idx].label;
        if (label < 0 || label >= spec.classes)
            throw std::invalid_argument("partition_noniid: label outside [0, classes)");
        by_class[static_cast<std::size_t>(label)].push_back(idx);
    }

    const std::size_t n = spec.n_clients;
    std::vector<std::size_t> sizes(n, data.size() / n);
    for (std::size_t i = 0; i < data.size() % n; ++i) ++sizes[i];

    // Preferred-class pass, then a shuffled pool fill for the rest.
    std::vector<std::vector<std::size_t>> assigned(n);
    for (std::size_t i = 0; i < n; ++i) {
        int pref = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
        auto& queue = by_class[static_cast<std::size_t>(pref)];
        std::size_t want = static_cast<std::size_t>(
            std::floor(spec.nir * static_cast<double>(sizes[i]) + 1e-9));
        std::size_t take = std::min(want, queue.size());
        for (std::size_t k = 0; k < take; ++k) {
            assigned[i].push_back(queue.front());
            queue.pop_front();
        }
        if (take < want && warnings) {
            warnings->push_back("client " + std::to_string(i) + ": preferred class " +
                                std::to_string(pref) + " short by " +
                                std::to_string(want - take) + " examples, filled uniformly");
        }
    }

    std::vector<std::size_t> pool;
    for (auto& q : by_class) pool.insert(pool.end(), q.begin(), q.end());
    rng.shuffle(pool);

    std::size_t pos = 0;
    std::vector<std::vector<LabeledExample>> clients(n);
    for (std::size_t i = 0; i < n; ++i) {
        while (assigned[i].size() < sizes[i]) assigned[i].push_back(pool[pos++]);
        clients[i].reserve(sizes[i]);
        for (std::size_t idx : assigned[i]) clients[i].push_back(data[idx]);
    }
    return clients;
}

namespace {
void stamp_patch(std::vector<double>& features, const TriggerSpec& t, std::size_t anchor_row,
                 std::size_t anchor_col, std::size_t cols) {
    for (std::size_t dr = 0; dr < t.patch_rows; ++dr)
        for (std::size_t dc = 0; dc < t.patch_cols; ++dc)
            features[(anchor_row + dr) * cols + (anchor_col + dc)] = t.patch_value;
}
}  // namespace

std::vector<LabeledExample> poison_client(const std::vector<LabeledExample>& data,
                                          const TriggerSpec& trigger,
                                          std::size_t region_index, double pdr,
                                          std::size_t rows, std::size_t cols,
                                          std::uint64_t seed) {
    validate_trigger(trigger, rows, cols);
    if (pdr < 0.0 || pdr > 1.0) throw std::invalid_argument("poison_client: pdr must be in [0,1]");
    if (region_index >= trigger.anchors.size())
        throw std::invalid_argument("poison_client: region index out of range");

    // Tolerance absorbs representation slop like 0.1 * 30 -> 3.0000000000000004.
    std::size_t k = static_cast<std::size_t>(
        std::max(0.0, std::ceil(pdr * static_cast<double>(data.size()) - 1e-9)));
    k = std::min(k, data.size());

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<LabeledExample> out = data;
    const auto& [ar, ac] = trigger.anchors[region_index];
    for (std::size_t i = 0; i < k; ++i) {
        LabeledExample& ex = out[order[i]];
        stamp_patch(ex.features, trigger, ar, ac, cols);
        ex.label = trigger.target_label;
    }
    return out;
}

LabeledExample apply_global_trigger(const LabeledExample& example, const TriggerSpec& trigger,
                                    std::size_t rows, std::size_t cols) {
    validate_trigger(trigger, rows, cols);
    if (example.features.size() != rows * cols)
        throw std::invalid_argument("apply_global_trigger: feature length != rows*cols");
    LabeledExample out = example;
    for (const auto& [ar, ac] : trigger.anchors) stamp_patch(out.features, trigger, ar, ac, cols);
    return out;
}

}  // namespace fedward
