#include "bergman/components.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace bergman {

CVec ComponentMap::node(std::size_t i) const {
    CVec z(n);
    const double* x = coords.data() + 2 * n * i;
    for (std::size_t j = 0; j < n; ++j) z[j] = {x[j], x[j + n]};
    return z;
}

std::size_t ComponentMap::nearest_node(const CVec& z, int label) const {
    const RVec x = to_real(z);
    std::size_t best = size();
    double best_d = kInf;
    for (std::size_t i = 0; i < size(); ++i) {
        if (label >= 0 && labels[i] != label) continue;
        const double* c = coords.data() + 2 * n * i;
        double s = 0.0;
        for (std::size_t k = 0; k < 2 * n; ++k) s += (c[k] - x[k]) * (c[k] - x[k]);
        if (s < best_d) best_d = s, best = i;
    }
    return best;
}

std::vector<std::size_t> ComponentMap::neighbours(std::size_t i) const {
    return {adj.begin() + adj_offset[i], adj.begin() + adj_offset[i + 1]};
}

namespace {

void build_csr(ComponentMap& map, const std::vector<std::vector<std::uint32_t>>& lists) {
    map.adj_offset.assign(lists.size() + 1, 0);
    for (std::size_t i = 0; i < lists.size(); ++i) map.adj_offset[i + 1] = map.adj_offset[i] + static_cast<std::uint32_t>(lists[i].size());
    map.adj.resize(map.adj_offset.back());
    for (std::size_t i = 0; i < lists.size(); ++i) std::copy(lists[i].begin(), lists[i].end(), map.adj.begin() + map.adj_offset[i]);
}

void label_components(ComponentMap& map) {
    const std::size_t count = map.size();
    map.component_count = 0;
    map.component_sizes.clear();
    map.representatives.clear();
    std::vector<std::uint32_t> queue;
    for (std::size_t s = 0; s < count; ++s) {
        if (map.labels[s] >= 0) continue;
        const int label = map.component_count++;
        map.representatives.push_back(s);
        queue.assign(1, static_cast<std::uint32_t>(s));
        map.labels[s] = label;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::uint32_t u = queue[head];
            for (std::uint32_t e = map.adj_offset[u]; e < map.adj_offset[u + 1]; ++e) {
                const std::uint32_t v = map.adj[e];
                if (map.labels[v] < 0) {
                    map.labels[v] = label;
                    queue.push_back(v);
                }
            }
        }
        map.component_sizes.push_back(queue.size());
    }
}

void grid_nodes(ComponentMap& map, const Domain& d, double h) {
    const double delta = map.delta;
    const auto m = static_cast<std::size_t>(std::ceil(2.0 * delta / h));
    if (static_cast<double>(m) * static_cast<double>(m) > 1e8)
        throw Error("resolution-too-fine", "grid would exceed 1e8 cells");
    const cplx w = map.w[0];
    auto cell_center = [&](std::size_t i, std::size_t j) {
        return cplx(w.real() - delta + (static_cast<double>(i) + 0.5) * h, w.imag() - delta + (static_cast<double>(j) + 0.5) * h);
    };
    auto inside = [&](cplx z) { return std::norm(z - w) < delta * delta && d.contains(CVec{z}); };
    std::vector<std::int32_t> id(m * m, -1);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            const cplx c = cell_center(i, j);
            if (!inside(c)) continue;
            id[j * m + i] = static_cast<std::int32_t>(map.coords.size() / 2);
            map.coords.push_back(c.real());
            map.coords.push_back(c.imag());
        }
    const std::size_t count = map.coords.size() / 2;
    std::vector<std::vector<std::uint32_t>> lists(count);
    auto link = [&](std::size_t a, std::size_t b, cplx mid) {
        if (!inside(mid)) return;
        lists[a].push_back(static_cast<std::uint32_t>(b));
        lists[b].push_back(static_cast<std::uint32_t>(a));
    };
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) {
            const std::int32_t a = id[j * m + i];
            if (a < 0) continue;
            const cplx c = cell_center(i, j);
            if (i + 1 < m && id[j * m + i + 1] >= 0) link(a, id[j * m + i + 1], c + cplx(0.5 * h, 0.0));
            if (j + 1 < m && id[(j + 1) * m + i] >= 0) link(a, id[(j + 1) * m + i], c + cplx(0.0, 0.5 * h));
        }
    build_csr(map, lists);
}

void epsilon_graph_nodes(ComponentMap& map, const Domain& d, const ComponentOptions& opt, std::uint64_t seed) {
    const auto pts = sample_near(d, map.w, map.delta, opt.samples, seed).points;
    const std::size_t count = pts.size();
    const std::size_t dim = 2 * map.n;
    for (const auto& z : pts) {
        const RVec x = to_real(z);
        map.coords.insert(map.coords.end(), x.begin(), x.end());
    }
    auto sq = [&](std::size_t a, std::size_t b) {
        const double* x = map.coords.data() + dim * a;
        const double* y = map.coords.data() + dim * b;
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
        return s;
    };

    constexpr std::size_t kBlock = 256;
    const std::size_t blocks = (count + kBlock - 1) / kBlock;
    std::vector<double> nn(count, kInf);
    for_each_chunk(blocks, [&](std::size_t b) {
        for (std::size_t i = b * kBlock; i < std::min(count, (b + 1) * kBlock); ++i)
            for (std::size_t j = 0; j < count; ++j)
                if (j != i) nn[i] = std::min(nn[i], sq(i, j));
    });
    double mean_nn = 0.0;
    for (double v : nn) mean_nn += std::sqrt(v);
    mean_nn /= static_cast<double>(count);
    const double eps = opt.epsilon_factor * mean_nn;
    map.spacing = eps;

    auto cell_of = [&](std::size_t i, std::vector<long>& cell) {
        for (std::size_t k = 0; k < dim; ++k) cell[k] = static_cast<long>(std::floor(map.coords[dim * i + k] / eps));
    };
    auto hash = [](const std::vector<long>& cell) {
        std::uint64_t h = 1469598103934665603ULL;
        for (long c : cell) h = (h ^ static_cast<std::uint64_t>(c)) * 1099511628211ULL;
        return h;
    };
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets;
    std::vector<long> cell(dim);
    for (std::size_t i = 0; i < count; ++i) {
        cell_of(i, cell);
        buckets[hash(cell)].push_back(static_cast<std::uint32_t>(i));
    }
    std::size_t offsets = 1;
    for (std::size_t k = 0; k < dim; ++k) offsets *= 3;
    std::vector<std::vector<std::uint32_t>> lists(count);
    for_each_chunk(blocks, [&](std::size_t b) {
        std::vector<long> base(dim), probe(dim);
        for (std::size_t i = b * kBlock; i < std::min(count, (b + 1) * kBlock); ++i) {
            cell_of(i, base);
            for (std::size_t o = 0; o < offsets; ++o) {
                std::size_t r = o;
                for (std::size_t k = 0; k < dim; ++k, r /= 3) probe[k] = base[k] + static_cast<long>(r % 3) - 1;
                const auto it = buckets.find(hash(probe));
                if (it == buckets.end()) continue;
                for (std::uint32_t j : it->second) {
                    if (j == i || sq(i, j) >= eps * eps) continue;
                    const CVec mid = 0.5 * (pts[i] + pts[j]);
                    if (d.contains(mid)) lists[i].push_back(j);
                }
            }
            std::sort(lists[i].begin(), lists[i].end());
            lists[i].erase(std::unique(lists[i].begin(), lists[i].end()), lists[i].end());
        }
    });
    build_csr(map, lists);
}

}  // namespace

ComponentMap connected_components(const Domain& d, const CVec& w, double delta, const ComponentOptions& options,
                                  std::uint64_t seed) {
    if (delta <= 0.0) throw Error("invalid-input", "delta must be positive");
    if (w.size() != d.n) throw Error("invalid-input", "ball centre has the wrong dimension");
    ComponentMap map;
    map.w = w;
    map.delta = delta;
    map.n = d.n;
    if (d.n == 1) {
        map.method = "grid";
        map.spacing = options.resolution > 0.0 ? options.resolution : 2.0 * delta / 256.0;
        grid_nodes(map, d, map.spacing);
    } else {
        map.method = "epsilon-graph";
        epsilon_graph_nodes(map, d, options, seed);
    }
    if (map.coords.empty()) throw Error("empty-intersection", "B(w, delta) ∩ Ω has no nodes");
    map.labels.assign(map.coords.size() / (2 * d.n), -1);
    label_components(map);

    const CVec center = options.inner_center.value_or(w);
    map.anchor_node = map.nearest_node(center);
    map.distinguished = map.labels[map.anchor_node];
    if (options.inner_center && options.inner_radius > 0.0) {
        for (std::size_t i = 0; i < map.size(); ++i)
            if (dist(map.node(i), center) < options.inner_radius && map.labels[i] != map.distinguished)
                throw Error("inner-ball-split", "inner ball meets more than one component");
    }
    return map;
}

std::vector<std::size_t> graph_path(const ComponentMap& map, std::size_t from, std::size_t to) {
    if (map.labels[from] != map.labels[to]) return {};
    std::vector<std::int64_t> parent(map.size(), -1);
    std::deque<std::size_t> queue{from};
    parent[from] = static_cast<std::int64_t>(from);
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        if (u == to) break;
        for (std::uint32_t e = map.adj_offset[u]; e < map.adj_offset[u + 1]; ++e) {
            const std::uint32_t v = map.adj[e];
            if (parent[v] < 0) {
                parent[v] = static_cast<std::int64_t>(u);
                queue.push_back(v);
            }
        }
    }
    std::vector<std::size_t> path;
    for (std::size_t v = to;; v = static_cast<std::size_t>(parent[v])) {
        path.push_back(v);
        if (v == from) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

ApproachSequence approach_sequence(const ComponentMap& map, const Domain& d, const CVec& target, std::size_t length) {
    if (length < 2) throw Error("invalid-input", "approach sequence needs length >= 2");
    const std::size_t nearest_any = map.nearest_node(target);
    const std::size_t nearest = map.nearest_node(target, map.distinguished);
    if (map.labels[nearest_any] != map.distinguished || dist(map.node(nearest), target) > 2.0 * map.spacing)
        throw Error("unreachable-boundary-point", "target is not on the closure of the distinguished component");

    const auto path = graph_path(map, map.anchor_node, nearest);
    std::vector<std::size_t> kept;
    double last = kInf;
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        const double r = dist(map.node(*it), target);
        if (kept.empty() || r > last) {
            kept.push_back(*it);
            last = r;
        }
    }
    std::reverse(kept.begin(), kept.end());

    ApproachSequence out;
    const std::size_t graph_count = std::min(kept.size(), std::max<std::size_t>(1, length / 2));
    for (std::size_t k = 0; k < graph_count; ++k) {
        const std::size_t idx = graph_count == 1 ? kept.size() - 1 : k * (kept.size() - 1) / (graph_count - 1);
        out.points.push_back(map.node(kept[idx]));
        out.distances.push_back(dist(out.points.back(), target));
    }
    out.graph_points = graph_count;

    const CVec base = out.points.back();
    const double d0 = out.distances.back();
    const std::size_t tail = length - graph_count;
    const double ratio = std::min(0.5, std::pow(1e-12 / d0, 1.0 / static_cast<double>(tail)));
    double scale = 1.0;
    for (std::size_t k = 0; k < tail; ++k) {
        scale *= ratio;
        CVec z = target + scale * (base - target);
        if (!d.contains(z)) break;
        const double r = dist(z, target);
        if (!(r < out.distances.back())) break;
        out.points.push_back(std::move(z));
        out.distances.push_back(r);
    }
    return out;
}

}  // namespace bergman
