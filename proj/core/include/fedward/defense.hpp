#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fedward/update.hpp"

namespace fedward {

/// Accepted ("benign majority") client group from adaptive OPTICS clustering.
struct ClusterResult {
    std::vector<std::size_t> inds;  // ascending client indices
    std::size_t size = 0;           // == inds.size()
    double eps_used = 0.0;
    std::size_t mins_used = 0;
    bool fallback = false;          // no cluster found; all clients accepted
};

enum class DefenseKind { fedward, fedavg, median, trimmed_mean, static_clip, kmeans2 };

struct DefenseSpec {
    DefenseKind kind = DefenseKind::fedavg;
    std::size_t trim_k = 0;    // trimmed_mean
    double clip_bound = 1.0;   // static_clip
};

/// Amplified magnitude sparsification: per layer, each value becomes
/// sign(value) * max(|layer|), with sign(0) = 0.
LayeredUpdate amgrad(const LayeredUpdate& w);

/// OPTICS traversal structures. `ordering` maps position -> point index;
/// `reachability` and `core_dist` are indexed by point.
struct OpticsResult {
    std::vector<std::size_t> ordering;
    std::vector<double> reachability;  // +inf for the first point of a component
    std::vector<double> core_dist;     // distance to min_pts-th NN, self included
};

inline constexpr double kInfReach = std::numeric_limits<double>::infinity();

/// Standard OPTICS over a distance matrix. Points are expanded when core at
/// max_eps; the seed list pops minimum reachability with lowest-index ties.
OpticsResult optics_order(const DistanceMatrix& d, std::size_t min_pts,
                          double max_eps = kInfReach);

/// DBSCAN-equivalent extraction at radius eps from an OPTICS traversal run
/// with generating distance >= eps. Returns clusters in formation order;
/// points in no cluster are noise.
std::vector<std::vector<std::size_t>> extract_dbscan(const OpticsResult& res, double eps);

/// Full adaptive clustering pass over sparsified updates: mins = ceil(m/2)+1,
/// eps = median of the per-point mins-NN distances, DBSCAN extraction, largest
/// cluster wins (ties keep the cluster containing the lowest index). Falls
/// back to accepting everyone when no cluster forms.
ClusterResult auto_optics(const std::vector<LayeredUpdate>& ws_am);

/// Norm-bounded clipping: rho_clip is the k-th smallest of the m update norms;
/// every update is divided by max(1, norm/rho_clip). Updates already within
/// the bound are returned unchanged.
std::pair<std::vector<LayeredUpdate>, double> adaptive_clip(
    const std::vector<LayeredUpdate>& ws, std::size_t k);

struct RoundDefenseTrace {
    std::vector<std::size_t> accepted;
    double rho_clip = 0.0;
    double eps = 0.0;
    std::size_t mins = 0;
    bool fallback = false;
};

/// One full server round: sparsify, cluster, clip, average the accepted
/// clipped updates, and add the result to the previous global parameters.
std::pair<LayeredUpdate, RoundDefenseTrace> fedward_aggregate(
    const LayeredUpdate& global_prev, const std::vector<LayeredUpdate>& ws);

/// Non-clustering reference aggregators plus a 2-means filter; the computed
/// update is added to global_prev.
LayeredUpdate baseline_aggregate(const DefenseSpec& spec, const LayeredUpdate& global_prev,
                                 const std::vector<LayeredUpdate>& ws);

/// Indices of the larger 2-means cluster over flattened updates (the accepted
/// set the kmeans2 baseline averages).
std::vector<std::size_t> kmeans2_accepted(const std::vector<LayeredUpdate>& ws);

/// Defense dispatch outcome for the harness: new global parameters plus the
/// accepted set and clustering trace when the defense produces one.
struct AggregateOutcome {
    LayeredUpdate global_next;
    std::vector<std::size_t> accepted;
    std::optional<double> rho_clip;
    std::optional<double> eps;
    bool fallback = false;
};

AggregateOutcome aggregate(const DefenseSpec& spec, const LayeredUpdate& global_prev,
                           const std::vector<LayeredUpdate>& ws);

}  // namespace fedward
