#include "fedward/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedward/config.hpp"
#include "fedward/rng.hpp"

namespace fedward {

namespace {

// Stream tags for seed derivation; fixed values are part of the
// reproducibility contract.
enum StreamTag : std::uint64_t {
    kTagTrainData = 1,
    kTagPartition = 3,
    kTagPoison = 4,
    kTagInit = 5,
    kTagSelect = 6,
    kTagTrain = 7,
    kTagForge = 8,
};

struct ImageDims {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

ImageDims dims_of(const DatasetSpec& spec) {
    if (const auto* syn = std::get_if<SyntheticSpec>(&spec)) return {syn->rows, syn->cols};
    const auto& idx = std::get<IdxPaths>(spec);
    return {idx.rows, idx.cols};
}

void check_examples(const std::vector<LabeledExample>& data, const ModelSpec& model,
                    const char* what) {
    for (const auto& ex : data) {
        if (ex.features.size() != model.input_dim)
            throw std::runtime_error(std::string(what) + ": feature size != model input_dim");
        if (ex.label < 0 || ex.label >= model.classes)
            throw std::runtime_error(std::string(what) + ": label outside [0, classes)");
    }
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
    if (cfg.n_clients < 2) throw std::invalid_argument("config: n_clients must be >= 2");
    if (cfg.m_selected < 1 || cfg.m_selected > cfg.n_clients)
        throw std::invalid_argument("config: need 1 <= m_selected <= n_clients");
    if (cfg.rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
    if (cfg.malicious_fraction < 0.0 || cfg.malicious_fraction >= 0.5)
        throw std::invalid_argument("config: malicious_fraction must be in [0, 0.5)");
    if (cfg.pdr < 0.0 || cfg.pdr > 1.0)
        throw std::invalid_argument("config: pdr must be in [0, 1]");
    if (cfg.nir < 0.0 || cfg.nir > 1.0)
        throw std::invalid_argument("config: nir must be in [0, 1]");
    if (cfg.train.lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
    if (cfg.train.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (cfg.train.local_epochs < 1)
        throw std::invalid_argument("config: local_epochs must be >= 1");
    validate(cfg.model);

    if (cfg.attack.scale_factor <= 0.0)
        throw std::invalid_argument("config: attack scale_factor must be positive");
    if (cfg.attack.boost_epochs < 0)
        throw std::invalid_argument("config: attack boost_epochs must be >= 0");
    if (cfg.attack.angle_deg < 0.0 || cfg.attack.angle_deg > 180.0)
        throw std::invalid_argument("config: attack angle_deg must be in [0, 180]");
    if (cfg.attack.magnitude_ratio <= 0.0)
        throw std::invalid_argument("config: attack magnitude_ratio must be positive");

    switch (cfg.defense.kind) {
        case DefenseKind::fedward:
            if (cfg.m_selected < 3)
                throw std::invalid_argument("config: fedward needs m_selected >= 3");
            break;
        case DefenseKind::trimmed_mean:
            if (2 * cfg.defense.trim_k >= cfg.m_selected)
                throw std::invalid_argument("config: need 2*trim_k < m_selected");
            break;
        case DefenseKind::static_clip:
            if (cfg.defense.clip_bound <= 0.0)
                throw std::invalid_argument("config: clip_bound must be positive");
            break;
        case DefenseKind::kmeans2:
            if (cfg.m_selected < 2)
                throw std::invalid_argument("config: kmeans2 needs m_selected >= 2");
            break;
        default:
            break;
    }

    const auto [rows, cols] = dims_of(cfg.dataset);
    if (rows * cols != cfg.model.input_dim)
        throw std::invalid_argument("config: model input_dim must equal rows*cols");
    if (const auto* syn = std::get_if<SyntheticSpec>(&cfg.dataset)) {
        if (syn->classes != cfg.model.classes)
            throw std::invalid_argument("config: dataset classes must equal model classes");
        if (syn->per_class_train < 1 || syn->per_class_test < 1)
            throw std::invalid_argument("config: per-class counts must be >= 1");
        if (syn->noise_sigma < 0.0)
            throw std::invalid_argument("config: noise_sigma must be >= 0");
    }
    TriggerSpec trig = cfg.trigger ? *cfg.trigger : default_corner_trigger(rows, cols);
    validate_trigger(trig, rows, cols);
    if (trig.target_label < 0 || trig.target_label >= cfg.model.classes)
        throw std::invalid_argument("config: trigger target_label outside [0, classes)");
}

std::optional<double> compute_aer(const std::vector<std::size_t>& selected_malicious,
                                  const std::vector<std::size_t>& accepted) {
    if (selected_malicious.empty()) return std::nullopt;
    std::size_t escaped = 0;
    for (std::size_t id : selected_malicious)
        if (std::find(accepted.begin(), accepted.end(), id) != accepted.end()) ++escaped;
    return static_cast<double>(escaped) / static_cast<double>(selected_malicious.size());
}

RunSummary run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);

    const auto [rows, cols] = dims_of(cfg.dataset);
    const TriggerSpec trigger =
        cfg.trigger ? *cfg.trigger : default_corner_trigger(rows, cols);

    std::vector<LabeledExample> train_data, test_data;
    if (const auto* syn = std::get_if<SyntheticSpec>(&cfg.dataset)) {
        // One pool per class split into train/test so both sides share the
        // class mean patterns; gen_synthetic output is class-major.
        const std::size_t per_class = syn->per_class_train + syn->per_class_test;
        auto pool = gen_synthetic(syn->classes, per_class, rows, cols, syn->noise_sigma,
                                  derive_seed(cfg.seed, kTagTrainData));
        for (int c = 0; c < syn->classes; ++c) {
            auto block = pool.begin() + static_cast<std::ptrdiff_t>(c * per_class);
            train_data.insert(train_data.end(), block,
                              block + static_cast<std::ptrdiff_t>(syn->per_class_train));
            test_data.insert(test_data.end(),
                             block + static_cast<std::ptrdiff_t>(syn->per_class_train),
                             block + static_cast<std::ptrdiff_t>(per_class));
        }
    } else {
        const auto& idx = std::get<IdxPaths>(cfg.dataset);
        train_data = load_idx(idx.train_images, idx.train_labels);
        test_data = load_idx(idx.test_images, idx.test_labels);
    }
    check_examples(train_data, cfg.model, "train data");
    check_examples(test_data, cfg.model, "test data");

    PartitionSpec part;
    part.n_clients = cfg.n_clients;
    part.nir = cfg.nir;
    part.classes = cfg.model.classes;
    part.seed = derive_seed(cfg.seed, kTagPartition);
    auto clients = partition_noniid(train_data, part);

    const std::size_t n_malicious = static_cast<std::size_t>(
        std::floor(cfg.malicious_fraction * static_cast<double>(cfg.n_clients)));
    if (poisons_data(cfg.attack.kind)) {
        for (std::size_t i = 0; i < n_malicious; ++i) {
            clients[i] = poison_client(clients[i], trigger, i % trigger.anchors.size(),
                                       cfg.pdr, rows, cols, derive_seed(cfg.seed, kTagPoison, i));
        }
    }

    LayeredUpdate global = init_params(cfg.model, derive_seed(cfg.seed, kTagInit));

    RunSummary summary;
    summary.config_hash = config_hash(cfg);
    summary.n_rounds = cfg.rounds;
    summary.rounds.reserve(cfg.rounds);

    double asr_sum = 0.0, ma_sum = 0.0, aer_sum = 0.0;
    std::size_t aer_rounds = 0;

    for (std::size_t t = 1; t <= cfg.rounds; ++t) {
        Rng select_rng(derive_seed(cfg.seed, kTagSelect, t));
        std::vector<std::size_t> selected =
            select_rng.sample_without_replacement(cfg.n_clients, cfg.m_selected);

        std::vector<LayeredUpdate> updates;
        updates.reserve(selected.size());
        for (std::size_t id : selected) {
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(cfg.seed, kTagTrain, id, t);
            const bool malicious = id < n_malicious && cfg.attack.kind != AttackKind::none;
            if (malicious) tc = boost_training(tc, cfg.attack);

            LayeredUpdate w = local_update(cfg.model, global, clients[id], tc);
            if (malicious) {
                if (scales_update(cfg.attack.kind)) w = apply_model_poison(w, cfg.attack);
                if (cfg.attack.kind == AttackKind::forged)
                    w = forge_update(w, cfg.attack.angle_deg, cfg.attack.magnitude_ratio,
                                     derive_seed(cfg.seed, kTagForge, id, t));
            }
            updates.push_back(std::move(w));
        }

        AggregateOutcome outcome = aggregate(cfg.defense, global, updates);
        global = std::move(outcome.global_next);

        RoundReport report;
        report.t = t;
        report.selected = selected;
        for (std::size_t pos : outcome.accepted) report.accepted.push_back(selected[pos]);
        std::sort(report.accepted.begin(), report.accepted.end());

        std::vector<std::size_t> selected_malicious;
        for (std::size_t id : selected)
            if (id < n_malicious && cfg.attack.kind != AttackKind::none)
                selected_malicious.push_back(id);
        report.malicious_selected = selected_malicious.size();
        report.aer = compute_aer(selected_malicious, report.accepted);

        report.ma = evaluate_ma(cfg.model, global, test_data);
        report.asr = evaluate_asr(cfg.model, global, test_data, trigger, rows, cols);
        report.rho_clip = outcome.rho_clip;
        report.eps = outcome.eps;
        report.fallback = outcome.fallback;

        asr_sum += report.asr;
        ma_sum += report.ma;
        if (report.aer) {
            aer_sum += *report.aer;
            ++aer_rounds;
        }
        if (report.fallback) ++summary.fallback_rounds;
        summary.rounds.push_back(std::move(report));
    }

    summary.aasr = asr_sum / static_cast<double>(cfg.rounds);
    summary.ma_avg = ma_sum / static_cast<double>(cfg.rounds);
    summary.ma_final = summary.rounds.back().ma;
    if (aer_rounds > 0) summary.aer = aer_sum / static_cast<double>(aer_rounds);
    return summary;
}

std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec) {
    if (spec.pdrs.empty() || spec.nirs.empty() || spec.defenses.empty())
        throw std::invalid_argument("sweep: pdr/nir/defense axes must be non-empty");
    std::vector<ExperimentConfig> grid;
    grid.reserve(spec.pdrs.size() * spec.nirs.size() * spec.defenses.size());
    std::uint64_t index = 0;
    for (double pdr : spec.pdrs) {
        for (double nir : spec.nirs) {
            for (DefenseKind defense : spec.defenses) {
                ExperimentConfig cfg = spec.base;
                cfg.pdr = pdr;
                cfg.attack.pdr = pdr;
                cfg.nir = nir;
                cfg.defense.kind = defense;
                cfg.seed = spec.base.seed + index;
                grid.push_back(std::move(cfg));
                ++index;
            }
        }
    }
    return grid;
}

std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& grid) {
    if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (const auto& cfg : grid) {
        SweepRow row;
        row.pdr = cfg.pdr;
        row.nir = cfg.nir;
        row.defense = cfg.defense.kind;
        try {
            row.summary = run_experiment(cfg);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace fedward
