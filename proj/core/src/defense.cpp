#include "fedward/defense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fedward/rng.hpp"

namespace fedward {

LayeredUpdate amgrad(const LayeredUpdate& w) {
    LayeredUpdate out = w;
    for (auto& l : out.layers) {
        double max_abs = 0.0;
        for (double v : l.values) max_abs = std::max(max_abs, std::abs(v));
        for (double& v : l.values) v = v > 0.0 ? max_abs : (v < 0.0 ? -max_abs : 0.0);
    }
    return out;
}

OpticsResult optics_order(const DistanceMatrix& d, std::size_t min_pts, double max_eps) {
    const std::size_t m = d.m;
    if (min_pts < 2 || min_pts > m)
        throw std::invalid_argument("optics_order: need 2 <= min_pts <= m");

    OpticsResult res;
    res.ordering.reserve(m);
    res.reachability.assign(m, kInfReach);
    res.core_dist.resize(m);

    // Core distance: min_pts-th nearest neighbor with the point itself first.
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) row[j] = d(i, j);
        std::nth_element(row.begin(), row.begin() + (min_pts - 1), row.end());
        res.core_dist[i] = row[min_pts - 1];
    }

    std::vector<bool> processed(m, false);
    for (std::size_t done = 0; done < m; ++done) {
        // Seed-list pop: minimum reachability, ties to the lowest index.
        std::size_t next = m;
        for (std::size_t i = 0; i < m; ++i) {
            if (processed[i]) continue;
            if (next == m || res.reachability[i] < res.reachability[next]) next = i;
        }
        if (res.reachability[next] == kInfReach) {
            // New component: start at the lowest-index unprocessed core point
            // so cluster borders cannot lead the walk and decay into noise.
            for (std::size_t i = 0; i < m; ++i) {
                if (!processed[i] && res.core_dist[i] <= max_eps) {
                    next = i;
                    break;
                }
            }
        }
        processed[next] = true;
        res.ordering.push_back(next);

        if (res.core_dist[next] > max_eps) continue;  // not a core point: no expansion
        for (std::size_t q = 0; q < m; ++q) {
            if (processed[q] || d(next, q) > max_eps) continue;
            double reach = std::max(res.core_dist[next], d(next, q));
            if (reach < res.reachability[q]) res.reachability[q] = reach;
        }
    }
    return res;
}

std::vector<std::vector<std::size_t>> extract_dbscan(const OpticsResult& res, double eps) {
    if (eps < 0.0) throw std::invalid_argument("extract_dbscan: eps must be >= 0");
    std::vector<std::vector<std::size_t>> clusters;
    bool open = false;
    for (std::size_t idx : res.ordering) {
        if (res.reachability[idx] > eps) {
            if (res.core_dist[idx] <= eps) {
                clusters.emplace_back();
                clusters.back().push_back(idx);
                open = true;
            } else {
                open = false;  // noise
            }
        } else if (open) {
            clusters.back().push_back(idx);
        } else {
            // Reachable point encountered before any cluster opened: it was
            // updated by a core point, so treat it as that cluster's start.
            clusters.emplace_back();
            clusters.back().push_back(idx);
            open = true;
        }
    }
    return clusters;
}

ClusterResult auto_optics(const std::vector<LayeredUpdate>& ws_am) {
    const std::size_t m = ws_am.size();
    if (m < 3) throw std::invalid_argument("auto_optics: need at least 3 updates");

    DistanceMatrix d = pairwise_distances(ws_am);
    const std::size_t mins = (m + 1) / 2 + 1;  // ceil(m/2) + 1

    // eps = median over points of the mins-NN distance (self counts first).
    std::vector<double> kdist(m);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) row[j] = d(i, j);
        std::nth_element(row.begin(), row.begin() + (mins - 1), row.end());
        kdist[i] = row[mins - 1];
    }
    std::sort(kdist.begin(), kdist.end());
    double eps = (m % 2 == 1) ? kdist[m / 2] : 0.5 * (kdist[m / 2 - 1] + kdist[m / 2]);

    OpticsResult res = optics_order(d, mins, eps);
    auto clusters = extract_dbscan(res, eps);

    ClusterResult out;
    out.eps_used = eps;
    out.mins_used = mins;
    if (clusters.empty()) {
        out.fallback = true;
        out.inds.resize(m);
        for (std::size_t i = 0; i < m; ++i) out.inds[i] = i;
    } else {
        // Largest cluster; a size tie keeps the one containing the lowest
        // index. With min_pts > m/2 a second cluster should not exist at all.
        std::size_t best = 0;
        for (std::size_t c = 1; c < clusters.size(); ++c) {
            if (clusters[c].size() > clusters[best].size()) best = c;
            else if (clusters[c].size() == clusters[best].size() &&
                     *std::min_element(clusters[c].begin(), clusters[c].end()) <
                         *std::min_element(clusters[best].begin(), clusters[best].end()))
                best = c;
        }
        out.inds = clusters[best];
        std::sort(out.inds.begin(), out.inds.end());
    }
    out.size = out.inds.size();
    return out;
}

std::pair<std::vector<LayeredUpdate>, double> adaptive_clip(
    const std::vector<LayeredUpdate>& ws, std::size_t k) {
    if (ws.empty()) throw std::invalid_argument("adaptive_clip: empty update list");
    if (k < 1 || k > ws.size()) throw std::invalid_argument("adaptive_clip: k out of range");

    std::vector<double> norms(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) norms[i] = l2_norm(ws[i]);
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const double rho = sorted[k - 1];

    std::vector<LayeredUpdate> clipped;
    clipped.reserve(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i) {
        double factor = norms[i] / rho;
        if (factor > 1.0) {
            LayeredUpdate c = ws[i];
            for (auto& l : c.layers)
                for (double& v : l.values) v /= factor;
            clipped.push_back(std::move(c));
        } else {
            clipped.push_back(ws[i]);  // within bound: bit-exact copy
        }
    }
    return {std::move(clipped), rho};
}

namespace {

LayeredUpdate mean_of(const std::vector<LayeredUpdate>& ws,
                      const std::vector<std::size_t>& inds) {
    LayeredUpdate acc = zeros_like(ws[inds.front()]);
    for (std::size_t i : inds) acc = axpy(1.0, ws[i], acc);
    return scaled(acc, 1.0 / static_cast<double>(inds.size()));
}

std::vector<std::size_t> all_indices(std::size_t m) {
    std::vector<std::size_t> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = i;
    return v;
}

LayeredUpdate coordinate_median(const std::vector<LayeredUpdate>& ws) {
    const std::size_t m = ws.size();
    std::vector<std::vector<double>> flat;
    flat.reserve(m);
    for (const auto& w : ws) flat.push_back(flatten(w));

    std::vector<double> out(flat[0].size());
    std::vector<double> col(m);
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (std::size_t i = 0; i < m; ++i) col[i] = flat[i][j];
        std::sort(col.begin(), col.end());
        out[j] = (m % 2 == 1) ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
    }
    return unflatten(out, ws[0]);
}

LayeredUpdate coordinate_trimmed_mean(const std::vector<LayeredUpdate>& ws, std::size_t trim_k) {
    const std::size_t m = ws.size();
    if (2 * trim_k >= m)
        throw std::invalid_argument("trimmed_mean: need 2*trim_k < m");
    std::vector<std::vector<double>> flat;
    flat.reserve(m);
    for (const auto& w : ws) flat.push_back(flatten(w));

    std::vector<double> out(flat[0].size());
    std::vector<double> col(m);
    for (std::size_t j = 0; j < out.size(); ++j) {
        for (std::size_t i = 0; i < m; ++i) col[i] = flat[i][j];
        std::sort(col.begin(), col.end());
        double sum = 0.0;
        for (std::size_t i = trim_k; i < m - trim_k; ++i) sum += col[i];
        out[j] = sum / static_cast<double>(m - 2 * trim_k);
    }
    return unflatten(out, ws[0]);
}

LayeredUpdate norm_clip(const LayeredUpdate& w, double bound) {
    double n = l2_norm(w);
    if (n <= bound) return w;
    return scaled(w, bound / n);
}

}  // namespace

std::vector<std::size_t> kmeans2_accepted(const std::vector<LayeredUpdate>& ws) {
    const std::size_t m = ws.size();
    if (m < 2) throw std::invalid_argument("kmeans2: need at least 2 updates");
    std::vector<std::vector<double>> flat;
    flat.reserve(m);
    for (const auto& w : ws) flat.push_back(flatten(w));
    const std::size_t dim = flat[0].size();

    auto sq_dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double diff = a[j] - b[j];
            s += diff * diff;
        }
        return s;
    };

    constexpr std::uint64_t kKmeansSeed = 0x6b6d65616e7332ull;
    constexpr int kRestarts = 10;
    constexpr int kMaxIters = 1000;

    double best_inertia = kInfReach;
    std::vector<int> best_labels(m, 0);

    for (int restart = 0; restart < kRestarts; ++restart) {
        Rng rng(derive_seed(kKmeansSeed, static_cast<std::uint64_t>(restart)));
        std::size_t i0 = static_cast<std::size_t>(rng.bounded(m));
        std::size_t i1 = static_cast<std::size_t>(rng.bounded(m - 1));
        if (i1 >= i0) ++i1;
        std::vector<std::vector<double>> centers = {flat[i0], flat[i1]};

        std::vector<int> labels(m, 0);
        for (int iter = 0; iter < kMaxIters; ++iter) {
            for (std::size_t i = 0; i < m; ++i)
                labels[i] = sq_dist(flat[i], centers[0]) <= sq_dist(flat[i], centers[1]) ? 0 : 1;

            std::vector<std::vector<double>> next(2, std::vector<double>(dim, 0.0));
            std::size_t counts[2] = {0, 0};
            for (std::size_t i = 0; i < m; ++i) {
                ++counts[labels[i]];
                for (std::size_t j = 0; j < dim; ++j) next[labels[i]][j] += flat[i][j];
            }
            for (int cidx = 0; cidx < 2; ++cidx) {
                if (counts[cidx] == 0) {
                    // Reseed an empty cluster at the farthest point.
                    std::size_t far = 0;
                    double far_d = -1.0;
                    for (std::size_t i = 0; i < m; ++i) {
                        double dd = sq_dist(flat[i], centers[1 - cidx]);
                        if (dd > far_d) {
                            far_d = dd;
                            far = i;
                        }
                    }
                    next[cidx] = flat[far];
                } else {
                    for (std::size_t j = 0; j < dim; ++j)
                        next[cidx][j] /= static_cast<double>(counts[cidx]);
                }
            }
            double movement = std::sqrt(sq_dist(next[0], centers[0])) +
                              std::sqrt(sq_dist(next[1], centers[1]));
            centers = std::move(next);
            if (movement <= 1e-9) break;
        }

        double inertia = 0.0;
        for (std::size_t i = 0; i < m; ++i) inertia += sq_dist(flat[i], centers[labels[i]]);
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_labels = labels;
        }
    }

    std::size_t count0 = 0;
    for (int l : best_labels) count0 += (l == 0);
    // Larger cluster wins; a tie keeps the cluster containing index 0.
    int keep = (2 * count0 >= m) ? 0 : 1;
    if (2 * count0 == m) keep = best_labels[0];

    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < m; ++i)
        if (best_labels[i] == keep) accepted.push_back(i);
    return accepted;
}

std::pair<LayeredUpdate, RoundDefenseTrace> fedward_aggregate(
    const LayeredUpdate& global_prev, const std::vector<LayeredUpdate>& ws) {
    if (ws.size() < 3) throw std::invalid_argument("fedward_aggregate: need at least 3 updates");
    for (const auto& w : ws)
        if (!same_structure(w, global_prev))
            throw std::invalid_argument("fedward_aggregate: update/global structure mismatch");

    std::vector<LayeredUpdate> ws_am;
    ws_am.reserve(ws.size());
    for (const auto& w : ws) ws_am.push_back(amgrad(w));

    ClusterResult cluster = auto_optics(ws_am);
    auto [clipped, rho] = adaptive_clip(ws, cluster.size);

    LayeredUpdate update = mean_of(clipped, cluster.inds);

    RoundDefenseTrace trace;
    trace.accepted = cluster.inds;
    trace.rho_clip = rho;
    trace.eps = cluster.eps_used;
    trace.mins = cluster.mins_used;
    trace.fallback = cluster.fallback;
    return {axpy(1.0, update, global_prev), trace};
}

LayeredUpdate baseline_aggregate(const DefenseSpec& spec, const LayeredUpdate& global_prev,
                                 const std::vector<LayeredUpdate>& ws) {
    if (ws.empty()) throw std::invalid_argument("baseline_aggregate: empty update list");
    LayeredUpdate update;
    switch (spec.kind) {
        case DefenseKind::fedavg:
            update = mean_of(ws, all_indices(ws.size()));
            break;
        case DefenseKind::median:
            update = coordinate_median(ws);
            break;
        case DefenseKind::trimmed_mean:
            update = coordinate_trimmed_mean(ws, spec.trim_k);
            break;
        case DefenseKind::static_clip: {
            if (spec.clip_bound <= 0.0)
                throw std::invalid_argument("static_clip: clip_bound must be positive");
            std::vector<LayeredUpdate> clipped;
            clipped.reserve(ws.size());
            for (const auto& w : ws) clipped.push_back(norm_clip(w, spec.clip_bound));
            update = mean_of(clipped, all_indices(ws.size()));
            break;
        }
        case DefenseKind::kmeans2:
            update = mean_of(ws, kmeans2_accepted(ws));
            break;
        case DefenseKind::fedward:
            throw std::invalid_argument("baseline_aggregate: use fedward_aggregate");
    }
    return axpy(1.0, update, global_prev);
}

AggregateOutcome aggregate(const DefenseSpec& spec, const LayeredUpdate& global_prev,
                           const std::vector<LayeredUpdate>& ws) {
    AggregateOutcome out;
    if (spec.kind == DefenseKind::fedward) {
        auto [next, trace] = fedward_aggregate(global_prev, ws);
        out.global_next = std::move(next);
        out.accepted = trace.accepted;
        out.rho_clip = trace.rho_clip;
        out.eps = trace.eps;
        out.fallback = trace.fallback;
    } else if (spec.kind == DefenseKind::kmeans2) {
        out.accepted = kmeans2_accepted(ws);
        out.global_next = baseline_aggregate(spec, global_prev, ws);
    } else {
        out.accepted = all_indices(ws.size());
        out.global_next = baseline_aggregate(spec, global_prev, ws);
    }
    return out;
}

}  // namespace fedward
