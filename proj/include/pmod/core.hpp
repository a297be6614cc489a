#pragma once

// Discrete metric measure graphs, exhaustions of unbounded spaces, and
// nested chains of node sets.

#include "pmod/error.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pmod {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

struct Edge
{
    NodeId u;
    NodeId v;
    double len; // length units
    double mu;  // measure units
};

struct Incidence
{
    NodeId node; // the other endpoint
    EdgeId edge;
};

/// Sorted, deduplicated set of node ids.
class NodeSet
{
  public:
    NodeSet() = default;
    explicit NodeSet(std::vector<NodeId> ids);
    NodeSet(std::initializer_list<NodeId> ids);

    /// All ids in [first, last).
    static NodeSet range(NodeId first, NodeId last);

    bool contains(NodeId x) const;
    bool empty() const { return ids_.empty(); }
    std::size_t size() const { return ids_.size(); }
    const std::vector<NodeId>& ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    NodeId front() const { return ids_.front(); }
    NodeId back() const { return ids_.back(); }

    /// Members with id < node_count; the restriction to a prefix truncation.
    NodeSet prefix(std::size_t node_count) const;

    bool subset_of(const NodeSet& other) const;
    bool intersects(const NodeSet& other) const;

    friend bool operator==(const NodeSet&, const NodeSet&) = default;

  private:
    std::vector<NodeId> ids_;
};

NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_intersection(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);

/// Finite, undirected, edge-weighted and edge-measured graph. Immutable.
///
/// Invariants (checked on construction): no self-loops, at most one edge per
/// unordered pair, len > 0, mu > 0, and connectedness unless explicitly waived
/// for derived subgraphs.
class MetricGraph
{
  public:
    MetricGraph(std::size_t node_count,
                std::vector<Edge> edges,
                std::vector<double> coords = {},
                int dimension = 0,
                bool require_connected = true);

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }

    std::span<const Incidence> incident(NodeId x) const;
    std::size_t degree(NodeId x) const { return incident(x).size(); }

    /// Spatial dimension of node positions; 0 when the graph carries none.
    int dimension() const { return dimension_; }
    std::span<const double> position(NodeId x) const;
    const std::vector<double>& coords() const { return coords_; }

    std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
    bool has_node(NodeId x) const { return x >= 0 && static_cast<std::size_t>(x) < node_count_; }
    void check_node(NodeId x) const;
    void check_nodes(const NodeSet& s) const;
    NodeSet all_nodes() const;
    bool is_connected() const;

    /// Induced subgraph on ids [0, count); ids are preserved.
    MetricGraph induced_prefix(std::size_t count, bool require_connected = true) const;

    struct Subgraph;
    /// Induced subgraph on an arbitrary set; ids are relabelled densely in
    /// increasing order. Connectivity is not required.
    Subgraph induced_subgraph(const NodeSet& keep) const;

  private:
    std::size_t node_count_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<Incidence> adjacency_;
    std::vector<double> coords_;
    int dimension_;
};

struct MetricGraph::Subgraph
{
    std::shared_ptr<const MetricGraph> graph;
    std::vector<NodeId> to_parent;   // child id -> parent id
    std::vector<NodeId> from_parent; // parent id -> child id or -1
};

using GraphPtr = std::shared_ptr<const MetricGraph>;

/// Shortest-path distance by edge length.
double graph_distance(const MetricGraph& g, NodeId u, NodeId v);

/// Multi-source Dijkstra; +inf for unreachable nodes.
std::vector<double> distances_from(const MetricGraph& g, const NodeSet& sources);

/// Open ball: nodes at distance < r from x0.
NodeSet ball(const MetricGraph& g, NodeId x0, double r);

/// Connected components of the subgraph induced on nodes \ s, ordered by
/// smallest member id.
std::vector<NodeSet> complement_components(const MetricGraph& g, const NodeSet& s);

/// Nested family of finite truncations G_1 ⊂ G_2 ⊂ ... of an unbounded
/// space, stored as the deepest truncation ("universe") plus the node count
/// of each level. Node ids are dense and level-ordered, so every G_m is the
/// induced subgraph on a prefix of the universe's ids.
class Exhaustion
{
  public:
    /// `level_sizes[m-1]` is |G_m|; `outer_frontier` lists the nodes of the
    /// deepest level that have neighbours beyond it in the full space.
    Exhaustion(GraphPtr universe,
               std::vector<std::size_t> level_sizes,
               std::vector<double> radii,
               NodeId base,
               NodeSet outer_frontier);

    int level_count() const { return static_cast<int>(level_sizes_.size()); }
    std::size_t level_size(int m) const;
    GraphPtr level(int m) const;
    NodeSet frontier(int m) const;
    int level_of(NodeId x) const;
    /// Smallest level containing every node of s (s nonempty).
    int smallest_level_containing(const NodeSet& s) const;

    const MetricGraph& universe() const { return *universe_; }
    GraphPtr universe_ptr() const { return universe_; }
    NodeId base() const { return base_; }
    const NodeSet& outer_frontier() const { return outer_frontier_; }

    const std::vector<double>& radii() const { return radii_; }
    int radius_count() const { return static_cast<int>(radii_.size()); }
    double radius(int n) const;

    /// Distances from the base point, measured in the universe.
    const std::vector<double>& base_distances() const { return base_distances_; }
    double distance_from_base(NodeId x) const { return base_distances_[static_cast<std::size_t>(x)]; }
    /// Universe nodes at distance < r from the base point.
    NodeSet base_ball(double r) const;

  private:
    GraphPtr universe_;
    std::vector<std::size_t> level_sizes_;
    std::vector<double> radii_;
    NodeId base_;
    NodeSet outer_frontier_;
    std::vector<double> base_distances_;
    // Truncations are built on first use; the cache is not observable.
    mutable std::vector<GraphPtr> level_cache_;
    std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
};

using ExhaustionPtr = std::shared_ptr<const Exhaustion>;

/// Decreasing sequence F_1 ⊇ F_2 ⊇ ... of node sets of an exhaustion's
/// universe, produced on demand by a generator (indices are 1-based).
class Chain
{
  public:
    enum class Origin
    {
        end_derived,
        user_supplied,
        space,
    };
    using Generator = std::function<NodeSet(int)>;

    Chain(ExhaustionPtr ex, int length, Generator gen, Origin origin, std::string label);

    static Chain from_sets(ExhaustionPtr ex, std::vector<NodeSet> sets, Origin origin, std::string label);
    /// F_n = X \ B(x0, n), the target family for classifying the space itself.
    static Chain space_complement(ExhaustionPtr ex);
    /// Component of X \ B(x0, R_n) containing `anchor`, for n = 1..length.
    static Chain end_through(ExhaustionPtr ex, NodeId anchor, int length, std::string label);

    NodeSet at(int n) const;
    /// F_n ∩ G_level.
    NodeSet at(int n, int level) const;
    int length() const { return length_; }
    Origin origin() const { return origin_; }
    const std::string& label() const { return label_; }
    const ExhaustionPtr& exhaustion() const { return ex_; }

    /// {F_{n+k}}.
    Chain shifted(int k) const;

  private:
    ExhaustionPtr ex_;
    int length_;
    Generator gen_;
    Origin origin_;
    std::string label_;
};

struct EquivalenceResult
{
    bool equivalent;
    int first_failing_k; // 0 when equivalent
};

/// Depth-limited test of chain equivalence: for every k <= depth look for
/// n_k with F_{n_k} ⊂ G_k and m_k with G_{m_k} ⊂ F_k among the indices each
/// chain defines.
EquivalenceResult chains_equivalent(const Chain& f, const Chain& g, int depth);

struct ChainCheck
{
    bool nonempty = true;
    bool nested = true;
    bool escapes = true;
    int first_violation = 0;
    std::vector<double> distance_to_base; // dist(x0, F_n)
};

/// Nonemptiness, nesting, and the escape condition up to `depth`. Escape is
/// only checkable to available depth: we require dist(x0, F_n) to be
/// nondecreasing and to grow strictly between F_1 and F_depth.
ChainCheck check_chain(const Chain& c, int depth);

} // namespace pmod
