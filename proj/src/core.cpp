#include "pmod/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

namespace pmod {

// ---------------------------------------------------------------- NodeSet

NodeSet::NodeSet(std::vector<NodeId> ids)
  : ids_(std::move(ids))
{
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

NodeSet::NodeSet(std::initializer_list<NodeId> ids)
  : NodeSet(std::vector<NodeId>(ids))
{
}

NodeSet NodeSet::range(NodeId first, NodeId last)
{
    NodeSet s;
    if (last > first) {
        s.ids_.resize(static_cast<std::size_t>(last - first));
        std::iota(s.ids_.begin(), s.ids_.end(), first);
    }
    return s;
}

bool NodeSet::contains(NodeId x) const
{
    return std::binary_search(ids_.begin(), ids_.end(), x);
}

NodeSet NodeSet::prefix(std::size_t node_count) const
{
    NodeSet s;
    auto cut = std::lower_bound(ids_.begin(), ids_.end(), static_cast<NodeId>(node_count));
    s.ids_.assign(ids_.begin(), cut);
    return s;
}

bool NodeSet::subset_of(const NodeSet& other) const
{
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(), ids_.end());
}

bool NodeSet::intersects(const NodeSet& other) const
{
    auto a = ids_.begin();
    auto b = other.ids_.begin();
    while (a != ids_.end() && b != other.ids_.end()) {
        if (*a < *b)
            ++a;
        else if (*b < *a)
            ++b;
        else
            return true;
    }
    return false;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b)
{
    std::vector<NodeId> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return NodeSet(std::move(out));
}

NodeSet set_intersection(const NodeSet& a, const NodeSet& b)
{
    std::vector<NodeId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return NodeSet(std::move(out));
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b)
{
    std::vector<NodeId> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return NodeSet(std::move(out));
}

// ------------------------------------------------------------ MetricGraph

MetricGraph::MetricGraph(std::size_t node_count,
                         std::vector<Edge> edges,
                         std::vector<double> coords,
                         int dimension,
                         bool require_connected)
  : node_count_(node_count)
  , edges_(std::move(edges))
  , coords_(std::move(coords))
  , dimension_(dimension)
{
    if (node_count_ == 0)
        throw InputError("graph has no nodes");
    if (node_count_ > static_cast<std::size_t>(std::numeric_limits<NodeId>::max()))
        throw InputError("graph too large");
    if (dimension_ < 0 || (dimension_ > 0 && coords_.size() != node_count_ * static_cast<std::size_t>(dimension_)))
        throw InputError("node positions do not match node count");
    if (dimension_ == 0 && !coords_.empty())
        throw InputError("node positions given without a dimension");

    std::vector<std::size_t> deg(node_count_, 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (!has_node(e.u) || !has_node(e.v)) {
            std::ostringstream msg;
            msg << "edge " << i << " references unknown node (" << e.u << ", " << e.v << ")";
            throw InputError(msg.str());
        }
        if (e.u == e.v)
            throw InputError("self-loop at node " + std::to_string(e.u));
        if (!(e.len > 0.0) || !std::isfinite(e.len))
            throw InputError("edge " + std::to_string(i) + " has nonpositive length");
        if (!(e.mu > 0.0) || !std::isfinite(e.mu))
            throw InputError("edge " + std::to_string(i) + " has nonpositive measure");
        ++deg[static_cast<std::size_t>(e.u)];
        ++deg[static_cast<std::size_t>(e.v)];
    }

    offsets_.assign(node_count_ + 1, 0);
    for (std::size_t x = 0; x < node_count_; ++x)
        offsets_[x + 1] = offsets_[x] + deg[x];
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        adjacency_[fill[static_cast<std::size_t>(e.u)]++] = { e.v, static_cast<EdgeId>(i) };
        adjacency_[fill[static_cast<std::size_t>(e.v)]++] = { e.u, static_cast<EdgeId>(i) };
    }
    for (std::size_t x = 0; x < node_count_; ++x) {
        auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[x]);
        auto last = adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[x + 1]);
        std::sort(first, last, [](const Incidence& a, const Incidence& b) { return a.node < b.node; });
        auto dup = std::adjacent_find(first, last, [](const Incidence& a, const Incidence& b) { return a.node == b.node; });
        if (dup != last) {
            std::ostringstream msg;
            msg << "duplicate edge between " << x << " and " << dup->node;
            throw InputError(msg.str());
        }
    }
    if (require_connected && !is_connected())
        throw InputError("graph is not connected");
}

std::span<const Incidence> MetricGraph::incident(NodeId x) const
{
    auto i = static_cast<std::size_t>(x);
    return { adjacency_.data() + offsets_[i], offsets_[i + 1] - offsets_[i] };
}

std::span<const double> MetricGraph::position(NodeId x) const
{
    if (dimension_ == 0)
        return {};
    auto d = static_cast<std::size_t>(dimension_);
    return { coords_.data() + static_cast<std::size_t>(x) * d, d };
}

std::optional<EdgeId> MetricGraph::find_edge(NodeId a, NodeId b) const
{
    auto inc = incident(a);
    auto it = std::lower_bound(inc.begin(), inc.end(), b, [](const Incidence& i, NodeId v) { return i.node < v; });
    if (it != inc.end() && it->node == b)
        return it->edge;
    return std::nullopt;
}

void MetricGraph::check_node(NodeId x) const
{
    if (!has_node(x))
        throw InputError("unknown node id " + std::to_string(x));
}

void MetricGraph::check_nodes(const NodeSet& s) const
{
    if (!s.empty() && (s.front() < 0 || !has_node(s.back())))
        throw InputError("node set references unknown node ids");
}

NodeSet MetricGraph::all_nodes() const
{
    return NodeSet::range(0, static_cast<NodeId>(node_count_));
}

bool MetricGraph::is_connected() const
{
    std::vector<char> seen(node_count_, 0);
    std::vector<NodeId> stack{ 0 };
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
        NodeId x = stack.back();
        stack.pop_back();
        for (const Incidence& inc : incident(x)) {
            if (!seen[static_cast<std::size_t>(inc.node)]) {
                seen[static_cast<std::size_t>(inc.node)] = 1;
                ++count;
                stack.push_back(inc.node);
            }
        }
    }
    return count == node_count_;
}

MetricGraph MetricGraph::induced_prefix(std::size_t count, bool require_connected) const
{
    if (count == 0 || count > node_count_)
        throw InputError("invalid prefix size");
    std::vector<Edge> kept;
    auto limit = static_cast<NodeId>(count);
    for (const Edge& e : edges_)
        if (e.u < limit && e.v < limit)
            kept.push_back(e);
    std::vector<double> c;
    if (dimension_ > 0)
        c.assign(coords_.begin(), coords_.begin() + static_cast<std::ptrdiff_t>(count * static_cast<std::size_t>(dimension_)));
    return MetricGraph(count, std::move(kept), std::move(c), dimension_, require_connected);
}

MetricGraph::Subgraph MetricGraph::induced_subgraph(const NodeSet& keep) const
{
    check_nodes(keep);
    if (keep.empty())
        throw InputError("induced subgraph on empty set");
    Subgraph out;
    out.to_parent = keep.ids();
    out.from_parent.assign(node_count_, -1);
    for (std::size_t i = 0; i < out.to_parent.size(); ++i)
        out.from_parent[static_cast<std::size_t>(out.to_parent[i])] = static_cast<NodeId>(i);
    std::vector<Edge> kept;
    for (const Edge& e : edges_) {
        NodeId a = out.from_parent[static_cast<std::size_t>(e.u)];
        NodeId b = out.from_parent[static_cast<std::size_t>(e.v)];
        if (a >= 0 && b >= 0)
            kept.push_back({ a, b, e.len, e.mu });
    }
    std::vector<double> c;
    if (dimension_ > 0) {
        for (NodeId x : out.to_parent) {
            auto p = position(x);
            c.insert(c.end(), p.begin(), p.end());
        }
    }
    out.graph = std::make_shared<const MetricGraph>(keep.size(), std::move(kept), std::move(c), dimension_, false);
    return out;
}

// ------------------------------------------------------- graph operations

std::vector<double> distances_from(const MetricGraph& g, const NodeSet& sources)
{
    g.check_nodes(sources);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.node_count(), inf);
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (NodeId s : sources) {
        dist[static_cast<std::size_t>(s)] = 0.0;
        queue.push({ 0.0, s });
    }
    while (!queue.empty()) {
        auto [d, x] = queue.top();
        queue.pop();
        if (d > dist[static_cast<std::size_t>(x)])
            continue;
        for (const Incidence& inc : g.incident(x)) {
            double nd = d + g.edge(inc.edge).len;
            auto& slot = dist[static_cast<std::size_t>(inc.node)];
            if (nd < slot) {
                slot = nd;
                queue.push({ nd, inc.node });
            }
        }
    }
    return dist;
}

double graph_distance(const MetricGraph& g, NodeId u, NodeId v)
{
    g.check_node(u);
    g.check_node(v);
    return distances_from(g, NodeSet{ u })[static_cast<std::size_t>(v)];
}

NodeSet ball(const MetricGraph& g, NodeId x0, double r)
{
    g.check_node(x0);
    if (!(r > 0.0))
        throw InputError("ball radius must be positive");
    auto dist = distances_from(g, NodeSet{ x0 });
    std::vector<NodeId> inside;
    for (std::size_t x = 0; x < dist.size(); ++x)
        if (dist[x] < r)
            inside.push_back(static_cast<NodeId>(x));
    return NodeSet(std::move(inside));
}

std::vector<NodeSet> complement_components(const MetricGraph& g, const NodeSet& s)
{
    g.check_nodes(s);
    if (s.size() >= g.node_count())
        throw InputError("removed set covers every node");
    std::vector<int> label(g.node_count(), -1);
    for (NodeId x : s)
        label[static_cast<std::size_t>(x)] = -2;
    std::vector<NodeSet> out;
    std::vector<NodeId> stack;
    for (std::size_t start = 0; start < g.node_count(); ++start) {
        if (label[start] != -1)
            continue;
        int id = static_cast<int>(out.size());
        std::vector<NodeId> members;
        label[start] = id;
        stack.push_back(static_cast<NodeId>(start));
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            members.push_back(x);
            for (const Incidence& inc : g.incident(x)) {
                auto& l = label[static_cast<std::size_t>(inc.node)];
                if (l == -1) {
                    l = id;
                    stack.push_back(inc.node);
                }
            }
        }
        out.emplace_back(std::move(members));
    }
    return out;
}

// ------------------------------------------------------------- Exhaustion

Exhaustion::Exhaustion(GraphPtr universe,
                       std::vector<std::size_t> level_sizes,
                       std::vector<double> radii,
                       NodeId base,
                       NodeSet outer_frontier)
  : universe_(std::move(universe))
  , level_sizes_(std::move(level_sizes))
  , radii_(std::move(radii))
  , base_(base)
  , outer_frontier_(std::move(outer_frontier))
{
    if (!universe_)
        throw InputError("exhaustion without a graph");
    if (level_sizes_.empty())
        throw InputError("exhaustion needs at least one level");
    for (std::size_t i = 0; i < level_sizes_.size(); ++i) {
        if (level_sizes_[i] == 0 || (i > 0 && level_sizes_[i] < level_sizes_[i - 1]))
            throw InputError("exhaustion level sizes must be positive and nondecreasing");
    }
    if (level_sizes_.back() != universe_->node_count())
        throw InputError("deepest level must be the whole graph");
    universe_->check_node(base_);
    if (static_cast<std::size_t>(base_) >= level_sizes_.front())
        throw InputError("base point must belong to the first level");
    for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (!(radii_[i] > 0.0) || (i > 0 && !(radii_[i] > radii_[i - 1])))
            throw InputError("radius schedule must be positive and strictly increasing");
    }
    universe_->check_nodes(outer_frontier_);
    base_distances_ = distances_from(*universe_, NodeSet{ base_ });
}

std::size_t Exhaustion::level_size(int m) const
{
    if (m < 1 || m > level_count())
        throw InputError("exhaustion level " + std::to_string(m) + " out of range");
    return level_sizes_[static_cast<std::size_t>(m - 1)];
}

GraphPtr Exhaustion::level(int m) const
{
    std::size_t n = level_size(m);
    if (n == universe_->node_count())
        return universe_;
    std::lock_guard<std::mutex> lock(*cache_mutex_);
    if (level_cache_.empty())
        level_cache_.resize(level_sizes_.size());
    auto& slot = level_cache_[static_cast<std::size_t>(m - 1)];
    if (!slot)
        slot = std::make_shared<const MetricGraph>(universe_->induced_prefix(n, false));
    return slot;
}

NodeSet Exhaustion::frontier(int m) const
{
    std::size_t n = level_size(m);
    if (m == level_count())
        return outer_frontier_;
    auto next = static_cast<NodeId>(level_size(m + 1));
    auto limit = static_cast<NodeId>(n);
    std::vector<NodeId> out;
    for (NodeId x = 0; x < limit; ++x) {
        for (const Incidence& inc : universe_->incident(x)) {
            if (inc.node >= limit && inc.node < next) {
                out.push_back(x);
                break;
            }
        }
    }
    return NodeSet(std::move(out));
}

int Exhaustion::level_of(NodeId x) const
{
    universe_->check_node(x);
    auto it = std::upper_bound(level_sizes_.begin(), level_sizes_.end(), static_cast<std::size_t>(x));
    return static_cast<int>(it - level_sizes_.begin()) + 1;
}

int Exhaustion::smallest_level_containing(const NodeSet& s) const
{
    if (s.empty())
        return 1;
    return level_of(s.back());
}

double Exhaustion::radius(int n) const
{
    if (n < 1 || n > radius_count())
        throw InputError("radius index " + std::to_string(n) + " out of range");
    return radii_[static_cast<std::size_t>(n - 1)];
}

NodeSet Exhaustion::base_ball(double r) const
{
    if (!(r > 0.0))
        throw InputError("ball radius must be positive");
    std::vector<NodeId> inside;
    for (std::size_t x = 0; x < base_distances_.size(); ++x)
        if (base_distances_[x] < r)
            inside.push_back(static_cast<NodeId>(x));
    return NodeSet(std::move(inside));
}

// ------------------------------------------------------------------ Chain

Chain::Chain(ExhaustionPtr ex, int length, Generator gen, Origin origin, std::string label)
  : ex_(std::move(ex))
  , length_(length)
  , gen_(std::move(gen))
  , origin_(origin)
  , label_(std::move(label))
{
    if (!ex_)
        throw InputError("chain without an exhaustion");
    if (length_ < 1)
        throw InputError("chain must define at least one set");
}

Chain Chain::from_sets(ExhaustionPtr ex, std::vector<NodeSet> sets, Origin origin, std::string label)
{
    for (const NodeSet& s : sets)
        ex->universe().check_nodes(s);
    int length = static_cast<int>(sets.size());
    auto shared = std::make_shared<const std::vector<NodeSet>>(std::move(sets));
    return Chain(std::move(ex), length, [shared](int n) { return (*shared)[static_cast<std::size_t>(n - 1)]; }, origin, std::move(label));
}

Chain Chain::space_complement(ExhaustionPtr ex)
{
    double far = 0.0;
    for (double d : ex->base_distances())
        if (std::isfinite(d))
            far = std::max(far, d);
    int length = std::max(1, static_cast<int>(std::floor(far)));
    const Exhaustion* raw = ex.get();
    auto gen = [raw](int n) {
        std::vector<NodeId> out;
        const auto& dist = raw->base_distances();
        for (std::size_t x = 0; x < dist.size(); ++x)
            if (dist[x] >= static_cast<double>(n))
                out.push_back(static_cast<NodeId>(x));
        return NodeSet(std::move(out));
    };
    return Chain(std::move(ex), length, gen, Origin::space, "space");
}

Chain Chain::end_through(ExhaustionPtr ex, NodeId anchor, int length, std::string label)
{
    ex->universe().check_node(anchor);
    if (length > ex->radius_count())
        throw InputError("end depth exceeds the radius schedule");
    const Exhaustion* raw = ex.get();
    auto gen = [raw, anchor](int n) {
        const MetricGraph& g = raw->universe();
        double r = raw->radius(n);
        const auto& dist = raw->base_distances();
        if (dist[static_cast<std::size_t>(anchor)] < r)
            return NodeSet{};
        std::vector<char> seen(g.node_count(), 0);
        std::vector<NodeId> stack{ anchor }, members;
        seen[static_cast<std::size_t>(anchor)] = 1;
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            members.push_back(x);
            for (const Incidence& inc : g.incident(x)) {
                auto i = static_cast<std::size_t>(inc.node);
                if (!seen[i] && dist[i] >= r) {
                    seen[i] = 1;
                    stack.push_back(inc.node);
                }
            }
        }
        return NodeSet(std::move(members));
    };
    return Chain(std::move(ex), length, gen, Origin::end_derived, std::move(label));
}

NodeSet Chain::at(int n) const
{
    if (n < 1 || n > length_)
        throw InputError("chain '" + label_ + "' index " + std::to_string(n) + " out of range 1.." + std::to_string(length_));
    return gen_(n);
}

NodeSet Chain::at(int n, int level) const
{
    return at(n).prefix(ex_->level_size(level));
}

Chain Chain::shifted(int k) const
{
    if (k < 0 || k >= length_)
        throw InputError("invalid chain shift");
    auto gen = gen_;
    return Chain(ex_, length_ - k, [gen, k](int n) { return gen(n + k); }, origin_, label_ + "+" + std::to_string(k));
}

EquivalenceResult chains_equivalent(const Chain& f, const Chain& g, int depth)
{
    if (f.exhaustion() != g.exhaustion())
        throw InputError("chains live on different exhaustions");
    if (depth < 1 || depth > f.length() || depth > g.length())
        throw InputError("equivalence depth exceeds chain length");
    std::vector<NodeSet> fs, gs;
    for (int n = 1; n <= f.length(); ++n)
        fs.push_back(f.at(n));
    for (int n = 1; n <= g.length(); ++n)
        gs.push_back(g.at(n));
    auto found = [](const std::vector<NodeSet>& family, const NodeSet& target) {
        return std::any_of(family.begin(), family.end(), [&](const NodeSet& s) { return !s.empty() && s.subset_of(target); });
    };
    for (int k = 1; k <= depth; ++k) {
        if (!found(fs, gs[static_cast<std::size_t>(k - 1)]) || !found(gs, fs[static_cast<std::size_t>(k - 1)]))
            return { false, k };
    }
    return { true, 0 };
}

ChainCheck check_chain(const Chain& c, int depth)
{
    if (depth < 1 || depth > c.length())
        throw InputError("check depth exceeds chain length");
    ChainCheck out;
    const Exhaustion& ex = *c.exhaustion();
    NodeSet previous;
    for (int n = 1; n <= depth; ++n) {
        NodeSet s = c.at(n);
        if (s.empty()) {
            out.nonempty = false;
            if (!out.first_violation)
                out.first_violation = n;
            out.distance_to_base.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        if (n > 1 && !s.subset_of(previous)) {
            out.nested = false;
            if (!out.first_violation)
                out.first_violation = n;
        }
        double d = std::numeric_limits<double>::infinity();
        for (NodeId x : s)
            d = std::min(d, ex.distance_from_base(x));
        out.distance_to_base.push_back(d);
        previous = std::move(s);
    }
    const auto& dist = out.distance_to_base;
    for (std::size_t i = 1; i < dist.size(); ++i) {
        if (dist[i] < dist[i - 1]) {
            out.escapes = false;
            if (!out.first_violation)
                out.first_violation = static_cast<int>(i + 1);
        }
    }
    if (depth > 1 && !(dist.back() > dist.front()))
        out.escapes = false;
    return out;
}

} // namespace pmod
