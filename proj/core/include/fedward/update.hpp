#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fedward {

/// One named tensor of a model update, stored flat with its shape.
struct Layer {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;

    std::size_t size() const;  // product of shape
};

/// A model parameter delta as an ordered list of named layers. Layer order is
/// part of the data contract: per-layer transforms depend on stable identity.
struct LayeredUpdate {
    std::vector<Layer> layers;

    std::size_t total_size() const;
};

/// Throws std::invalid_argument when a layer's value count disagrees with its
/// shape or any value is non-finite.
void validate(const LayeredUpdate& u);

/// True when both updates have identical layer names and shapes in order.
bool same_structure(const LayeredUpdate& a, const LayeredUpdate& b);

/// Concatenation of layer values in declared layer order.
std::vector<double> flatten(const LayeredUpdate& u);

/// Rebuilds an update with `like`'s layer names/shapes from a flat vector.
LayeredUpdate unflatten(std::span<const double> flat, const LayeredUpdate& like);

double l2_norm(const LayeredUpdate& u);

/// Elementwise a*x + y. Throws on structure mismatch.
LayeredUpdate axpy(double a, const LayeredUpdate& x, const LayeredUpdate& y);

/// Elementwise c*u.
LayeredUpdate scaled(const LayeredUpdate& u, double c);

/// Zero update with the same structure as `like`.
LayeredUpdate zeros_like(const LayeredUpdate& like);

/// Symmetric pairwise Euclidean distances with zero diagonal.
struct DistanceMatrix {
    std::size_t m = 0;
    std::vector<double> entries;  // row-major m*m

    double operator()(std::size_t i, std::size_t j) const { return entries[i * m + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * m + j]; }
};

/// Euclidean distances between the flattened updates. Requires at least two
/// shape-compatible updates.
DistanceMatrix pairwise_distances(const std::vector<LayeredUpdate>& us);

}  // namespace fedward
