#pragma once

#include <cstddef>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace habm::trophic
{

class TrophicError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when F is requested for a graph without (non-self-loop) edges.
class NoEdgesError : public TrophicError
{
public:
    NoEdgesError()
        : TrophicError("graph has no edges; trophic incoherence is undefined")
    {
    }
};

class DisconnectedError : public TrophicError
{
public:
    DisconnectedError()
        : TrophicError("trophic levels need a weakly connected graph; restrict to the largest "
                       "weak component first")
    {
    }
};

struct Edge {
    std::size_t source = 0;
    std::size_t target = 0;
    double weight = 1.0;
};

/// Weighted digraph with labelled nodes. Edge i -> j reads "i endorses j"
/// (listener -> speaker) when built from an interaction ledger.
class DirectedGraph
{
public:
    DirectedGraph() = default;
    explicit DirectedGraph(std::size_t n);

    std::size_t add_node(std::string label);
    /// Returns the node carrying `label`, creating it if needed.
    std::size_t node(const std::string& label);
    /// Weights must be finite and > 0. Parallel edges are kept; they act as one
    /// edge carrying the summed weight.
    void add_edge(std::size_t source, std::size_t target, double weight = 1.0);

    std::size_t node_count() const
    {
        return m_labels.size();
    }
    std::span<const Edge> edges() const
    {
        return m_edges;
    }
    const std::string& label(std::size_t i) const
    {
        return m_labels[i];
    }
    std::span<const std::string> labels() const
    {
        return m_labels;
    }
    double total_weight() const;
    std::size_t self_loop_count() const;

    DirectedGraph transposed() const;
    DirectedGraph scaled(double factor) const;

private:
    std::vector<std::string> m_labels;
    std::unordered_map<std::string, std::size_t> m_index;
    std::vector<Edge> m_edges;
};

DirectedGraph strip_self_loops(const DirectedGraph& g);

struct ComponentSplit {
    DirectedGraph graph;               ///< induced subgraph, nodes renumbered in original order
    std::vector<std::size_t> kept;     ///< original index of each subgraph node
    std::vector<std::size_t> omitted;  ///< original indices outside the component
};

/// Largest weakly connected component after stripping self-loops. Ties go to
/// the component holding the smallest node index. Empty graph -> empty split.
ComponentSplit largest_weak_component(const DirectedGraph& g);

bool is_weakly_connected(const DirectedGraph& g);

struct SolverOptions {
    std::size_t dense_limit = 2000; ///< above this node count use conjugate gradients
    double cg_tolerance = 1e-12;    ///< relative residual target for CG
    std::size_t cg_max_iterations = 0; ///< 0 means 10 * n
};

/// Levels h minimising sum w_ij (h_j - h_i - 1)^2: the min-norm solution of
/// L h = in - out with L = diag(in + out) - (W + W^T). Returned with sum(h) = 0.
/// Self-loops are ignored. Throws DisconnectedError / NoEdgesError.
std::vector<double> trophic_levels(const DirectedGraph& g, const SolverOptions& opts = {});

/// F(h) = sum w_ij (h_j - h_i - 1)^2 / sum w_ij over non-self-loop edges.
double incoherence(const DirectedGraph& g, std::span<const double> levels);

/// Euclidean norm of L h - (in - out), for checking a level vector.
double level_residual(const DirectedGraph& g, std::span<const double> levels);

struct TrophicResult {
    std::vector<double> levels;        ///< per original node; NaN for omitted nodes
    double incoherence = 0.0;          ///< F
    std::vector<std::size_t> component; ///< original indices used
    std::vector<std::size_t> omitted;
    std::size_t self_loops_removed = 0;
};

/// Full pipeline: strip self-loops, restrict to the largest weak component,
/// solve for levels, evaluate F. Throws NoEdgesError if nothing is left.
TrophicResult analyze(const DirectedGraph& g, const SolverOptions& opts = {});

double trophic_incoherence(const DirectedGraph& g);

struct LayoutOptions {
    double layer_step = 0.25;
    int barycenter_iterations = 8;
};

struct NodePlacement {
    double x = 0.0;
    double y = 0.0;
    int layer = 0;
    double speaking_frequency = 0.0; ///< weighted in-degree (column sum of W)
};

/// Layered drawing coordinates: y is the trophic level, nodes are binned into
/// layers of `layer_step` and ordered within a layer by repeated barycentre
/// sweeps. `levels` is indexed like the graph's nodes.
std::vector<NodePlacement> layered_layout(const DirectedGraph& g, std::span<const double> levels,
                                          const LayoutOptions& opts = {});

struct EdgeListParse {
    DirectedGraph graph;
    std::size_t self_loops = 0;
};

/// Parses `source target weight` lines; `#` starts a comment, blank lines are
/// skipped. Throws TrophicError naming the offending line.
EdgeListParse parse_edge_list(std::istream& in);

} // namespace habm::trophic
