#pragma once

#include <cstdint>

#include "fedward/model.hpp"
#include "fedward/update.hpp"

namespace fedward {

enum class AttackKind { none, data_poison, scale, data_poison_scale, forged };

/// What a malicious client does each round. `pdr` controls the data-poisoning
/// side; the remaining fields control the model-poisoning side per kind.
struct AttackSpec {
    AttackKind kind = AttackKind::none;
    double scale_factor = 1.0;    // scale kinds
    double pdr = 0.0;
    int boost_epochs = 0;         // extra local epochs for malicious clients
    double angle_deg = 0.0;       // forged
    double magnitude_ratio = 1.0; // forged
};

/// Deviation taxonomy the defense components are aimed at: large magnitude
/// (mla), large angle (ala), or deliberately slight deviations (amsa).
enum class AttackClass { benign, mla, ala, amsa };

/// True when the kind stamps triggers into the client's training data.
bool poisons_data(AttackKind kind);

/// True when the kind rescales the trained update before upload.
bool scales_update(AttackKind kind);

/// Multiplies every value by spec.scale_factor. Requires a scaling kind and a
/// positive factor.
LayeredUpdate apply_model_poison(const LayeredUpdate& w, const AttackSpec& spec);

/// Returns cfg with local_epochs increased by spec.boost_epochs.
TrainConfig boost_training(const TrainConfig& cfg, const AttackSpec& spec);

/// Builds an update at an exact angle (degrees) to `reference` with norm
/// magnitude_ratio * ||reference||, rotating inside the plane spanned by the
/// reference and a seeded random orthogonal direction.
LayeredUpdate forge_update(const LayeredUpdate& reference, double angle_deg,
                           double magnitude_ratio, std::uint64_t seed);

/// Total classification of any AttackSpec into the deviation taxonomy.
AttackClass classify(const AttackSpec& spec);

}  // namespace fedward
