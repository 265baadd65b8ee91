#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fedward {

/// A flattened H*W image with pixel values in [0,1] and a class label.
struct LabeledExample {
    std::vector<double> features;
    int label = 0;
};

struct PartitionSpec {
    std::size_t n_clients = 2;
    double nir = 0.0;  // preferred-class fraction per client, in [0,1]
    int classes = 2;
    std::uint64_t seed = 0;
};

/// Regional backdoor trigger: identical patches stamped at several anchor
/// positions. A single region is used when poisoning one client's data; the
/// assembled global trigger stamps every region.
struct TriggerSpec {
    std::size_t patch_rows = 2;
    std::size_t patch_cols = 2;
    double patch_value = 1.0;
    std::vector<std::pair<std::size_t, std::size_t>> anchors;  // (row, col)
    int target_label = 0;
};

/// Throws std::invalid_argument if the trigger is empty or any patch falls
/// outside an image of the given size.
void validate_trigger(const TriggerSpec& trigger, std::size_t rows, std::size_t cols);

/// 2x2 patches of value 1.0 at the four image corners, target label 0.
TriggerSpec default_corner_trigger(std::size_t rows, std::size_t cols);

/// Gaussian class blobs: class c gets a seeded mean pattern in [0.2, 0.8],
/// examples are mean + sigma*noise clipped to [0,1]. Output is class-major
/// (all of class 0 first) and deterministic for a given seed.
std::vector<LabeledExample> gen_synthetic(int classes, std::size_t per_class,
                                          std::size_t rows, std::size_t cols,
                                          double noise_sigma, std::uint64_t seed);

/// Reads a big-endian IDX image/label file pair (images magic 0x00000803,
/// labels magic 0x00000801); pixel bytes are scaled to [0,1] by /255.
std::vector<LabeledExample> load_idx(const std::string& images_path,
                                     const std::string& labels_path);

/// Splits `data` into n_clients disjoint subsets covering a shuffled copy as
/// evenly as possible. Client i prefers class (i mod C): a fraction nir of its
/// slots come from that class, the rest from a uniformly shuffled pool.
/// Preferred-class shortfalls fall back to the pool and are reported through
/// `warnings` when given.
std::vector<std::vector<LabeledExample>> partition_noniid(
    const std::vector<LabeledExample>& data, const PartitionSpec& spec,
    std::vector<std::string>* warnings = nullptr);

/// Stamps the single regional patch anchors[region_index] onto ceil(pdr*|data|)
/// examples (first indices of a seeded shuffle) and relabels them to the
/// target label. Untouched examples are returned unchanged in place.
std::vector<LabeledExample> poison_client(const std::vector<LabeledExample>& data,
                                          const TriggerSpec& trigger,
                                          std::size_t region_index, double pdr,
                                          std::size_t rows, std::size_t cols,
                                          std::uint64_t seed);

/// Stamps every regional patch (the assembled global trigger); the label is
/// left unchanged.
LabeledExample apply_global_trigger(const LabeledExample& example,
                                    const TriggerSpec& trigger, std::size_t rows,
                                    std::size_t cols);

}  // namespace fedward
