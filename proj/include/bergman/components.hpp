#ifndef BERGMAN_COMPONENTS_HPP
#define BERGMAN_COMPONENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman {

/// Discrete connectivity structure of B(w, delta) ∩ Ω.
///
/// For n = 1 the nodes are the centres of a square pixel grid and edges join
/// 4-neighbours whose midpoint is also in the domain. For n >= 2 the nodes are
/// uniform samples and edges join pairs closer than epsilon whose midpoint is in
/// the domain. Nodes are stored as flat real coordinates to keep dense grids cheap.
struct ComponentMap {
    CVec w;
    double delta = 0.0;
    std::size_t n = 1;
    std::string method;   ///< "grid" or "epsilon-graph"
    double spacing = 0.0; ///< grid step or epsilon
    std::vector<double> coords;             ///< node i occupies [2n i, 2n i + 2n)
    std::vector<std::uint32_t> adj_offset;  ///< CSR offsets, size nodes + 1
    std::vector<std::uint32_t> adj;
    std::vector<int> labels;
    int component_count = 0;
    int distinguished = -1;
    std::size_t anchor_node = 0;  ///< node of the inner ball b nearest its centre
    std::vector<std::size_t> component_sizes;
    std::vector<std::size_t> representatives;  ///< first node of each component

    std::size_t size() const { return labels.size(); }
    CVec node(std::size_t i) const;
    std::size_t nearest_node(const CVec& z, int label = -1) const;
    std::vector<std::size_t> neighbours(std::size_t i) const;
};

struct ComponentOptions {
    /// Grid step for n = 1; 0 selects 2 delta / 256.
    double resolution = 0.0;
    /// Sample count for n >= 2.
    std::size_t samples = 20000;
    /// Epsilon as a multiple of the mean nearest-neighbour spacing.
    double epsilon_factor = 4.0;
    /// Inner ball b whose component is E(B, b); defaults to the node nearest w.
    std::optional<CVec> inner_center;
    double inner_radius = 0.0;
};

/// Errors: "empty-intersection", "resolution-too-fine", "inner-ball-split".
ComponentMap connected_components(const Domain& d, const CVec& w, double delta, const ComponentOptions& options,
                                  std::uint64_t seed);

/// Node indices of a shortest graph path between two nodes of one component
/// (empty when they are not connected).
std::vector<std::size_t> graph_path(const ComponentMap& map, std::size_t from, std::size_t to);

struct ApproachSequence {
    std::vector<CVec> points;
    std::vector<double> distances;  ///< |z_k - target|, strictly decreasing
    std::size_t graph_points = 0;   ///< leading points taken from graph nodes
};

/// Points of the distinguished component approaching `target`: a graph path
/// from the component's inner-ball node to the node nearest the target, reduced
/// to strictly decreasing distance, then continued along the segment towards
/// the target by halving while it stays in the domain.
/// Errors: "unreachable-boundary-point".
ApproachSequence approach_sequence(const ComponentMap& map, const Domain& d, const CVec& target, std::size_t length);

}  // namespace bergman

#endif
