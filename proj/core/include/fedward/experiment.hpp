#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fedward/attack.hpp"
#include "fedward/data.hpp"
#include "fedward/defense.hpp"
#include "fedward/model.hpp"

namespace fedward {

struct SyntheticSpec {
    int classes = 10;
    std::size_t per_class_train = 100;
    std::size_t per_class_test = 20;
    std::size_t rows = 16;
    std::size_t cols = 16;
    double noise_sigma = 0.15;
};

struct IdxPaths {
    std::string train_images;
    std::string train_labels;
    std::string test_images;
    std::string test_labels;
    std::size_t rows = 28;
    std::size_t cols = 28;
};

using DatasetSpec = std::variant<SyntheticSpec, IdxPaths>;

/// Full description of one simulated run; equal configs with equal seeds give
/// byte-identical reports.
struct ExperimentConfig {
    std::size_t n_clients = 10;
    std::size_t m_selected = 10;
    std::size_t rounds = 10;
    double malicious_fraction = 0.0;  // in [0, 0.5)
    double pdr = 0.0;
    double nir = 0.0;
    AttackSpec attack;
    DefenseSpec defense;
    ModelSpec model;
    TrainConfig train;
    DatasetSpec dataset;
    std::optional<TriggerSpec> trigger;  // default: 2x2 corner patches, target 0
    std::uint64_t seed = 0;
};

void validate(const ExperimentConfig& cfg);

struct RoundReport {
    std::size_t t = 0;
    std::vector<std::size_t> selected;        // client ids, ascending
    std::size_t malicious_selected = 0;
    std::vector<std::size_t> accepted;        // client ids, ascending
    std::optional<double> aer;                // absent when no malicious selected
    double asr = 0.0;
    double ma = 0.0;
    std::optional<double> rho_clip;           // fedward only
    std::optional<double> eps;                // fedward only
    bool fallback = false;
};

struct RunSummary {
    double aasr = 0.0;                 // mean asr over all rounds
    std::optional<double> aer;         // mean over rounds with malicious selected
    double ma_final = 0.0;
    double ma_avg = 0.0;
    std::size_t n_rounds = 0;
    std::size_t fallback_rounds = 0;
    std::uint64_t config_hash = 0;
    std::vector<RoundReport> rounds;
};

/// Escape rate of one round: fraction of the selected malicious clients that
/// the defense accepted. Absent when no malicious client was selected.
std::optional<double> compute_aer(const std::vector<std::size_t>& selected_malicious,
                                  const std::vector<std::size_t>& accepted);

RunSummary run_experiment(const ExperimentConfig& cfg);

struct SweepSpec {
    ExperimentConfig base;
    std::vector<double> pdrs;
    std::vector<double> nirs;
    std::vector<DefenseKind> defenses;
};

struct SweepRow {
    double pdr = 0.0;
    double nir = 0.0;
    DefenseKind defense = DefenseKind::fedavg;
    std::optional<RunSummary> summary;  // empty on per-run failure
    std::string error;
};

/// Expands the grid pdr-major (pdr, then nir, then defense); run i uses seed
/// base.seed + i.
std::vector<ExperimentConfig> expand_sweep(const SweepSpec& spec);

/// Runs every config, continuing past per-run failures.
std::vector<SweepRow> sweep(const std::vector<ExperimentConfig>& grid);

}  // namespace fedward
