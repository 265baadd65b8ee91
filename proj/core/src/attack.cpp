#include "fedward/attack.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fedward/rng.hpp"

namespace fedward {

bool poisons_data(AttackKind kind) {
    return kind == AttackKind::data_poison || kind == AttackKind::data_poison_scale;
}

bool scales_update(AttackKind kind) {
    return kind == AttackKind::scale || kind == AttackKind::data_poison_scale;
}

LayeredUpdate apply_model_poison(const LayeredUpdate& w, const AttackSpec& spec) {
    if (!scales_update(spec.kind))
        throw std::invalid_argument("apply_model_poison: attack kind does not scale");
    if (spec.scale_factor <= 0.0)
        throw std::invalid_argument("apply_model_poison: scale_factor must be positive");
    return scaled(w, spec.scale_factor);
}

TrainConfig boost_training(const TrainConfig& cfg, const AttackSpec& spec) {
    if (spec.boost_epochs < 0)
        throw std::invalid_argument("boost_training: boost_epochs must be >= 0");
    TrainConfig out = cfg;
    out.local_epochs += static_cast<std::size_t>(spec.boost_epochs);
    return out;
}

LayeredUpdate forge_update(const LayeredUpdate& reference, double angle_deg,
                           double magnitude_ratio, std::uint64_t seed) {
    if (angle_deg < 0.0 || angle_deg > 180.0)
        throw std::invalid_argument("forge_update: angle must be in [0, 180] degrees");
    if (magnitude_ratio <= 0.0)
        throw std::invalid_argument("forge_update: magnitude_ratio must be positive");

    std::vector<double> ref = flatten(reference);
    double ref_norm_sq = 0.0;
    for (double v : ref) ref_norm_sq += v * v;
    double ref_norm = std::sqrt(ref_norm_sq);
    if (ref_norm == 0.0) throw std::invalid_argument("forge_update: zero reference");

    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double target_norm = magnitude_ratio * ref_norm;
    const double cos_t = std::cos(theta);
    const double sin_t = std::sin(theta);

    std::vector<double> out(ref.size());
    if (sin_t == 0.0 || angle_deg == 0.0 || angle_deg == 180.0) {
        double s = (angle_deg == 180.0 ? -1.0 : 1.0) * target_norm / ref_norm;
        for (std::size_t i = 0; i < ref.size(); ++i) out[i] = s * ref[i];
        return unflatten(out, reference);
    }
    if (ref.size() < 2)
        throw std::invalid_argument("forge_update: need dimension >= 2 for a nonzero angle");

    // Seeded direction orthogonalized against the reference.
    Rng rng(seed);
    std::vector<double> ortho(ref.size());
    double ortho_norm = 0.0;
    for (int attempt = 0; attempt < 64 && ortho_norm < 1e-12; ++attempt) {
        for (double& v : ortho) v = rng.normal();
        double dot = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) dot += ortho[i] * ref[i];
        double proj = dot / ref_norm_sq;
        double sum = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i) {
            ortho[i] -= proj * ref[i];
            sum += ortho[i] * ortho[i];
        }
        ortho_norm = std::sqrt(sum);
    }
    if (ortho_norm < 1e-12)
        throw std::runtime_error("forge_update: failed to draw an orthogonal direction");

    for (std::size_t i = 0; i < ref.size(); ++i)
        out[i] = target_norm * (cos_t * ref[i] / ref_norm + sin_t * ortho[i] / ortho_norm);
    return unflatten(out, reference);
}

AttackClass classify(const AttackSpec& spec) {
    if (spec.kind == AttackKind::none) return AttackClass::benign;
    if (scales_update(spec.kind) && spec.scale_factor >= 10.0) return AttackClass::mla;
    if (spec.boost_epochs > 0 || spec.pdr >= 0.5) return AttackClass::ala;
    if (spec.kind == AttackKind::forged) {
        bool slight = spec.angle_deg <= 15.0 && spec.magnitude_ratio >= 0.5 &&
                      spec.magnitude_ratio <= 2.0;
        return slight ? AttackClass::amsa : AttackClass::ala;
    }
    // Low-rate poisoning and mild scaling keep deviations slight.
    return AttackClass::amsa;
}

}  // namespace fedward
