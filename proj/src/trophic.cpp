#include "habm/trophic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace habm::trophic
{

DirectedGraph::DirectedGraph(std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        add_node(std::to_string(i));
    }
}

std::size_t DirectedGraph::add_node(std::string label)
{
    if (m_index.contains(label)) {
        throw TrophicError("duplicate node label '" + label + "'");
    }
    const std::size_t id = m_labels.size();
    m_index.emplace(label, id);
    m_labels.push_back(std::move(label));
    return id;
}

std::size_t DirectedGraph::node(const std::string& label)
{
    const auto it = m_index.find(label);
    return it != m_index.end() ? it->second : add_node(label);
}

void DirectedGraph::add_edge(std::size_t source, std::size_t target, double weight)
{
    if (source >= node_count() || target >= node_count()) {
        throw TrophicError("edge endpoint out of range");
    }
    if (!(weight > 0.0) || !std::isfinite(weight)) {
        throw TrophicError("edge weight must be finite and > 0");
    }
    m_edges.push_back({source, target, weight});
}

double DirectedGraph::total_weight() const
{
    double s = 0.0;
    for (const auto& e : m_edges) {
        if (e.source != e.target) {
            s += e.weight;
        }
    }
    return s;
}

std::size_t DirectedGraph::self_loop_count() const
{
    return static_cast<std::size_t>(std::count_if(
        m_edges.begin(), m_edges.end(), [](const Edge& e) { return e.source == e.target; }));
}

DirectedGraph DirectedGraph::transposed() const
{
    DirectedGraph out = *this;
    for (auto& e : out.m_edges) {
        std::swap(e.source, e.target);
    }
    return out;
}

DirectedGraph DirectedGraph::scaled(double factor) const
{
    DirectedGraph out = *this;
    for (auto& e : out.m_edges) {
        e.weight *= factor;
    }
    return out;
}

DirectedGraph strip_self_loops(const DirectedGraph& g)
{
    DirectedGraph out;
    for (const auto& l : g.labels()) {
        out.add_node(l);
    }
    for (const auto& e : g.edges()) {
        if (e.source != e.target) {
            out.add_edge(e.source, e.target, e.weight);
        }
    }
    return out;
}

namespace
{

class DisjointSets
{
public:
    explicit DisjointSets(std::size_t n)
        : m_parent(n)
    {
        std::iota(m_parent.begin(), m_parent.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x)
    {
        while (m_parent[x] != x) {
            m_parent[x] = m_parent[m_parent[x]];
            x = m_parent[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b) {
            // smaller index becomes the root so roots are component minima
            if (b < a) {
                std::swap(a, b);
            }
            m_parent[b] = a;
        }
    }

private:
    std::vector<std::size_t> m_parent;
};

std::vector<std::size_t> component_roots(const DirectedGraph& g)
{
    DisjointSets sets(g.node_count());
    for (const auto& e : g.edges()) {
        if (e.source != e.target) {
            sets.unite(e.source, e.target);
        }
    }
    std::vector<std::size_t> root(g.node_count());
    for (std::size_t i = 0; i < root.size(); ++i) {
        root[i] = sets.find(i);
    }
    return root;
}

/// Dense Cholesky factorisation in place (lower triangle). Returns false if a
/// pivot is not positive.
bool cholesky(std::vector<double>& a, std::size_t n)
{
    for (std::size_t j = 0; j < n; ++j) {
        double* rj = &a[j * n];
        double d = rj[j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= rj[k] * rj[k];
        }
        if (!(d > 0.0)) {
            return false;
        }
        d = std::sqrt(d);
        rj[j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double* ri = &a[i * n];
            double s = ri[j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= ri[k] * rj[k];
            }
            ri[j] = s / d;
        }
    }
    return true;
}

void cholesky_solve(const std::vector<double>& l, std::size_t n, std::vector<double>& x)
{
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}

/// Sparse symmetric Laplacian L = diag(in + out) - (W + W^T), merged per row.
struct Laplacian {
    std::vector<double> diag;
    std::vector<std::vector<std::pair<std::size_t, double>>> off; ///< (col, -weight) per row
    std::vector<double> imbalance; ///< in - out

    explicit Laplacian(const DirectedGraph& g)
        : diag(g.node_count(), 0.0)
        , off(g.node_count())
        , imbalance(g.node_count(), 0.0)
    {
        for (const auto& e : g.edges()) {
            if (e.source == e.target) {
                continue;
            }
            diag[e.source] += e.weight;
            diag[e.target] += e.weight;
            off[e.source].emplace_back(e.target, -e.weight);
            off[e.target].emplace_back(e.source, -e.weight);
            imbalance[e.target] += e.weight;
            imbalance[e.source] -= e.weight;
        }
        for (auto& row : off) {
            std::sort(row.begin(), row.end());
            std::size_t w = 0;
            for (std::size_t r = 0; r < row.size(); ++r) {
                if (w > 0 && row[w - 1].first == row[r].first) {
                    row[w - 1].second += row[r].second;
                }
                else {
                    row[w++] = row[r];
                }
            }
            row.resize(w);
        }
    }

    std::size_t size() const
    {
        return diag.size();
    }

    void apply(std::span<const double> x, std::span<double> y) const
    {
        for (std::size_t i = 0; i < size(); ++i) {
            double s = diag[i] * x[i];
            for (const auto& [j, v] : off[i]) {
                s += v * x[j];
            }
            y[i] = s;
        }
    }
};

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

void remove_mean(std::vector<double>& x)
{
    if (x.empty()) {
        return;
    }
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (auto& v : x) {
        v -= m;
    }
}

/// L + (s/n) 1 1^T is positive definite on a connected graph and its solution
/// for a zero-sum right-hand side is the zero-sum solution of L h = b.
std::vector<double> solve_dense(const Laplacian& lap)
{
    const std::size_t n = lap.size();
    const double scale = std::accumulate(lap.diag.begin(), lap.diag.end(), 0.0) /
                         static_cast<double>(n);
    const double shift = scale / static_cast<double>(n);
    std::vector<double> a(n * n, shift);
    for (std::size_t i = 0; i < n; ++i) {
        a[i * n + i] += lap.diag[i];
        for (const auto& [j, v] : lap.off[i]) {
            a[i * n + j] += v;
        }
    }
    if (!cholesky(a, n)) {
        throw TrophicError("Laplacian factorisation failed");
    }
    std::vector<double> h = lap.imbalance;
    cholesky_solve(a, n, h);

    // one round of iterative refinement against the singular system
    std::vector<double> r(n);
    lap.apply(h, r);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = lap.imbalance[i] - r[i];
    }
    cholesky_solve(a, n, r);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] += r[i];
    }
    remove_mean(h);
    return h;
}

/// Jacobi-preconditioned conjugate gradients on the consistent singular system.
std::vector<double> solve_cg(const Laplacian& lap, const SolverOptions& opts)
{
    const std::size_t n = lap.size();
    const std::size_t max_it = opts.cg_max_iterations ? opts.cg_max_iterations : 10 * n;
    std::vector<double> x(n, 0.0);
    std::vector<double> r = lap.imbalance;
    const double bnorm = std::sqrt(dot(r, r));
    if (bnorm == 0.0) {
        return x;
    }
    std::vector<double> z(n), p(n), ap(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = r[i] / lap.diag[i];
    }
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 0; it < max_it; ++it) {
        lap.apply(p, ap);
        const double alpha = rz / dot(p, ap);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if (std::sqrt(dot(r, r)) <= opts.cg_tolerance * bnorm) {
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = r[i] / lap.diag[i];
        }
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
    }
    remove_mean(x);
    return x;
}

} // namespace

bool is_weakly_connected(const DirectedGraph& g)
{
    const auto root = component_roots(g);
    return std::all_of(root.begin(), root.end(), [](std::size_t r) { return r == 0; });
}

ComponentSplit largest_weak_component(const DirectedGraph& g)
{
    ComponentSplit out;
    const std::size_t n = g.node_count();
    if (n == 0) {
        return out;
    }
    const auto root = component_roots(g);
    std::vector<std::size_t> size(n, 0);
    for (const auto r : root) {
        ++size[r];
    }
    // roots are component minima, so scanning upward keeps the smallest index on ties
    std::size_t best = 0;
    for (std::size_t r = 1; r < n; ++r) {
        if (size[r] > size[best]) {
            best = r;
        }
    }
    std::vector<std::size_t> remap(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (root[i] == best) {
            remap[i] = out.kept.size();
            out.kept.push_back(i);
            out.graph.add_node(g.label(i));
        }
        else {
            out.omitted.push_back(i);
        }
    }
    for (const auto& e : g.edges()) {
        if (e.source != e.target && remap[e.source] != n) {
            out.graph.add_edge(remap[e.source], remap[e.target], e.weight);
        }
    }
    return out;
}

std::vector<double> trophic_levels(const DirectedGraph& g, const SolverOptions& opts)
{
    if (g.total_weight() <= 0.0) {
        throw NoEdgesError();
    }
    if (!is_weakly_connected(g)) {
        throw DisconnectedError();
    }
    const Laplacian lap(g);
    return g.node_count() <= opts.dense_limit ? solve_dense(lap) : solve_cg(lap, opts);
}

double incoherence(const DirectedGraph& g, std::span<const double> levels)
{
    double num = 0.0;
    double den = 0.0;
    for (const auto& e : g.edges()) {
        if (e.source == e.target) {
            continue;
        }
        const double gap = levels[e.target] - levels[e.source] - 1.0;
        num += e.weight * gap * gap;
        den += e.weight;
    }
    if (den <= 0.0) {
        throw NoEdgesError();
    }
    return num / den;
}

double level_residual(const DirectedGraph& g, std::span<const double> levels)
{
    const Laplacian lap(g);
    std::vector<double> r(lap.size());
    lap.apply(levels, r);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - lap.imbalance[i];
        s += d * d;
    }
    return std::sqrt(s);
}

TrophicResult analyze(const DirectedGraph& g, const SolverOptions& opts)
{
    TrophicResult res;
    res.self_loops_removed = g.self_loop_count();
    if (g.total_weight() <= 0.0) {
        throw NoEdgesError();
    }
    auto split = largest_weak_component(g);
    const auto h = trophic_levels(split.graph, opts);
    res.incoherence = incoherence(split.graph, h);
    res.levels.assign(g.node_count(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < split.kept.size(); ++k) {
        res.levels[split.kept[k]] = h[k];
    }
    res.component = std::move(split.kept);
    res.omitted = std::move(split.omitted);
    return res;
}

double trophic_incoherence(const DirectedGraph& g)
{
    return analyze(g).incoherence;
}

std::vector<NodePlacement> layered_layout(const DirectedGraph& g, std::span<const double> levels,
                                          const LayoutOptions& opts)
{
    const std::size_t n = g.node_count();
    std::vector<NodePlacement> out(n);
    if (n == 0) {
        return out;
    }

    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const auto& e : g.edges()) {
        if (e.source == e.target) {
            continue;
        }
        out[e.target].speaking_frequency += e.weight;
        adj[e.source].emplace_back(e.target, e.weight);
        adj[e.target].emplace_back(e.source, e.weight);
    }

    std::vector<std::vector<std::size_t>> layers;
    std::vector<int> layer_keys;
    {
        std::vector<std::pair<int, std::size_t>> keyed(n);
        for (std::size_t i = 0; i < n; ++i) {
            keyed[i] = {static_cast<int>(std::lround(levels[i] / opts.layer_step)), i};
        }
        std::sort(keyed.begin(), keyed.end());
        for (const auto& [key, i] : keyed) {
            if (layer_keys.empty() || layer_keys.back() != key) {
                layer_keys.push_back(key);
                layers.emplace_back();
            }
            layers.back().push_back(i);
        }
    }

    auto place = [&] {
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const double offset = 0.5 * static_cast<double>(layers[l].size() - 1);
            for (std::size_t k = 0; k < layers[l].size(); ++k) {
                auto& p = out[layers[l][k]];
                p.x = static_cast<double>(k) - offset;
                p.layer = layer_keys[l];
            }
        }
    };
    place();

    std::vector<double> bary(n);
    for (int it = 0; it < opts.barycenter_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double sw = 0.0;
            double sx = 0.0;
            for (const auto& [j, w] : adj[i]) {
                if (out[j].layer != out[i].layer) {
                    sw += w;
                    sx += w * out[j].x;
                }
            }
            bary[i] = sw > 0.0 ? sx / sw : out[i].x;
        }
        for (auto& layer : layers) {
            std::stable_sort(layer.begin(), layer.end(),
                             [&](std::size_t a, std::size_t b) { return bary[a] < bary[b]; });
        }
        place();
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i].y = levels[i];
    }
    return out;
}

EdgeListParse parse_edge_list(std::istream& in)
{
    EdgeListParse out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        std::istringstream ss(line);
        std::string src;
        std::string dst;
        if (!(ss >> src)) {
            continue;
        }
        std::string weight_text;
        std::string extra;
        if (!(ss >> dst >> weight_text) || (ss >> extra)) {
            throw TrophicError("line " + std::to_string(lineno) +
                               ": expected 'source target weight'");
        }
        double weight = 0.0;
        try {
            std::size_t used = 0;
            weight = std::stod(weight_text, &used);
            if (used != weight_text.size()) {
                throw std::invalid_argument(weight_text);
            }
        }
        catch (const std::exception&) {
            throw TrophicError("line " + std::to_string(lineno) + ": bad weight '" + weight_text +
                               "'");
        }
        if (!(weight > 0.0) || !std::isfinite(weight)) {
            throw TrophicError("line " + std::to_string(lineno) + ": weight must be > 0");
        }
        const auto s = out.graph.node(src);
        const auto t = out.graph.node(dst);
        out.graph.add_edge(s, t, weight);
        if (s == t) {
            ++out.self_loops;
        }
    }
    return out;
}

} // namespace habm::trophic
