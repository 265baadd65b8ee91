#pragma once

#include <cstdint>
#include <string>

#include "fedward/experiment.hpp"

namespace fedward {

// Name <-> enum mappings used by the config file and the sweep CSV.
std::string to_string(DefenseKind kind);
std::string to_string(AttackKind kind);
std::string to_string(ModelKind kind);
DefenseKind defense_kind_from_string(const std::string& s);
AttackKind attack_kind_from_string(const std::string& s);
ModelKind model_kind_from_string(const std::string& s);

/// Parses a single-run config document. Unknown keys anywhere in the tree are
/// an error so typos cannot silently fall back to defaults.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Sweep document: {"base": <run config>, "grid": {"pdr": [...], "nir": [...],
/// "defense": [...]}}.
SweepSpec parse_sweep_config(const std::string& json_text);
SweepSpec load_sweep_config(const std::string& path);

/// Canonical (key-sorted, compact) JSON rendering of a config; the stable
/// basis for config_hash.
std::string canonical_config_json(const ExperimentConfig& cfg);

std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace fedward
