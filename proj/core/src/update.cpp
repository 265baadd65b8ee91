#include "fedward/update.hpp"

#include <cmath>
#include <stdexcept>

namespace fedward {

std::size_t Layer::size() const {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return shape.empty() ? 0 : n;
}

std::size_t LayeredUpdate::total_size() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.values.size();
    return n;
}

void validate(const LayeredUpdate& u) {
    for (const auto& l : u.layers) {
        if (l.shape.empty())
            throw std::invalid_argument("layer '" + l.name + "' has empty shape");
        for (std::size_t s : l.shape)
            if (s == 0) throw std::invalid_argument("layer '" + l.name + "' has zero extent");
        if (l.size() != l.values.size())
            throw std::invalid_argument("layer '" + l.name + "' shape/value count mismatch");
        for (double v : l.values)
            if (!std::isfinite(v))
                throw std::invalid_argument("layer '" + l.name + "' has non-finite value");
    }
}

bool same_structure(const LayeredUpdate& a, const LayeredUpdate& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        if (a.layers[i].name != b.layers[i].name) return false;
        if (a.layers[i].shape != b.layers[i].shape) return false;
    }
    return true;
}

std::vector<double> flatten(const LayeredUpdate& u) {
    std::vector<double> out;
    out.reserve(u.total_size());
    for (const auto& l : u.layers) out.insert(out.end(), l.values.begin(), l.values.end());
    return out;
}

LayeredUpdate unflatten(std::span<const double> flat, const LayeredUpdate& like) {
    if (flat.size() != like.total_size())
        throw std::invalid_argument("unflatten: flat length does not match layer metadata");
    LayeredUpdate out;
    out.layers.reserve(like.layers.size());
    std::size_t pos = 0;
    for (const auto& l : like.layers) {
        Layer nl;
        nl.name = l.name;
        nl.shape = l.shape;
        nl.values.assign(flat.begin() + pos, flat.begin() + pos + l.values.size());
        pos += l.values.size();
        out.layers.push_back(std::move(nl));
    }
    return out;
}

double l2_norm(const LayeredUpdate& u) {
    double sum = 0.0;
    for (const auto& l : u.layers)
        for (double v : l.values) sum += v * v;
    return std::sqrt(sum);
}

LayeredUpdate axpy(double a, const LayeredUpdate& x, const LayeredUpdate& y) {
    if (!same_structure(x, y)) throw std::invalid_argument("axpy: layer structure mismatch");
    LayeredUpdate out = y;
    for (std::size_t i = 0; i < x.layers.size(); ++i) {
        const auto& xv = x.layers[i].values;
        auto& ov = out.layers[i].values;
        for (std::size_t j = 0; j < xv.size(); ++j) ov[j] += a * xv[j];
    }
    return out;
}

LayeredUpdate scaled(const LayeredUpdate& u, double c) {
    LayeredUpdate out = u;
    for (auto& l : out.layers)
        for (double& v : l.values) v *= c;
    return out;
}

LayeredUpdate zeros_like(const LayeredUpdate& like) {
    LayeredUpdate out = like;
    for (auto& l : out.layers)
        for (double& v : l.values) v = 0.0;
    return out;
}

DistanceMatrix pairwise_distances(const std::vector<LayeredUpdate>& us) {
    if (us.size() < 2)
        throw std::invalid_argument("pairwise_distances: need at least 2 updates");
    for (std::size_t i = 1; i < us.size(); ++i)
        if (!same_structure(us[0], us[i]))
            throw std::invalid_argument("pairwise_distances: layer structure mismatch");

    std::vector<std::vector<double>> flat;
    flat.reserve(us.size());
    for (const auto& u : us) flat.push_back(flatten(u));

    DistanceMatrix d;
    d.m = us.size();
    d.entries.assign(d.m * d.m, 0.0);
    for (std::size_t i = 0; i < d.m; ++i) {
        for (std::size_t j = i + 1; j < d.m; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < flat[i].size(); ++k) {
                double diff = flat[i][k] - flat[j][k];
                sum += diff * diff;
            }
            double dist = std::sqrt(sum);
            d.at(i, j) = dist;
            d.at(j, i) = dist;
        }
    }
    return d;
}

}  // namespace fedward
