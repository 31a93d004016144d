#pragma once

// Shared by the unit tests and the acceptance binary: a reproducible family of
// small random digraphs and a dense pseudoinverse reference for F.

#include "habm/rng.h"
#include "habm/trophic.h"

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

namespace habm::testing
{

struct FamilyGraph {
    trophic::DirectedGraph graph;   ///< as given to the library, self-loops included
    Eigen::MatrixXd weights;        ///< w(i, j) for edge i -> j, diagonal = injected loops
    std::size_t self_loops = 0;
};

/// Graph k of the family: 2..6 nodes, each ordered pair present with
/// probability ~0.45, weights in {1, 2}, and a few self-loops on top.
inline FamilyGraph family_graph(std::uint64_t k)
{
    auto rng = Rng(hash_values(0x7e57ULL, k));
    for (;;) {
        const int n = 2 + static_cast<int>(rng() % 5);
        FamilyGraph out;
        out.graph = trophic::DirectedGraph(static_cast<std::size_t>(n));
        out.weights = Eigen::MatrixXd::Zero(n, n);
        bool any = false;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) {
                    continue;
                }
                if (rng.uniform() < 0.45) {
                    const double w = rng.bernoulli(0.5) ? 2.0 : 1.0;
                    out.graph.add_edge(i, j, w);
                    out.weights(i, j) = w;
                    any = true;
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (rng.uniform() < 0.3) {
                const double w = rng.bernoulli(0.5) ? 2.0 : 1.0;
                out.graph.add_edge(i, i, w);
                out.weights(i, i) = w;
                ++out.self_loops;
            }
        }
        if (any) {
            return out;
        }
    }
}

/// Node indices of the largest weakly connected component, smallest index on
/// ties. Plain depth-first search over the symmetrised adjacency matrix.
inline std::vector<int> oracle_component(const Eigen::MatrixXd& w)
{
    const int n = static_cast<int>(w.rows());
    std::vector<int> label(n, -1);
    std::vector<int> best;
    for (int s = 0; s < n; ++s) {
        if (label[s] >= 0) {
            continue;
        }
        std::vector<int> comp;
        std::vector<int> stack{s};
        label[s] = s;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (int t = 0; t < n; ++t) {
                if (t != v && label[t] < 0 && (w(v, t) != 0.0 || w(t, v) != 0.0)) {
                    label[t] = s;
                    stack.push_back(t);
                }
            }
        }
        if (comp.size() > best.size()) {
            std::sort(comp.begin(), comp.end());
            best = comp;
        }
    }
    return best;
}

struct OracleResult {
    Eigen::VectorXd levels; ///< on the component, in component order
    std::vector<int> component;
    double incoherence = 0.0;
};

/// h = pinv(L) (in - out) on the largest weak component after zeroing the diagonal.
inline OracleResult oracle_trophic(Eigen::MatrixXd w)
{
    w.diagonal().setZero();
    OracleResult r;
    r.component = oracle_component(w);
    const int m = static_cast<int>(r.component.size());
    Eigen::MatrixXd sub(m, m);
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            sub(a, b) = w(r.component[a], r.component[b]);
        }
    }
    const Eigen::VectorXd in = sub.colwise().sum().transpose();
    const Eigen::VectorXd out = sub.rowwise().sum();
    Eigen::MatrixXd lap = -(sub + sub.transpose());
    lap.diagonal() += in + out;
    const Eigen::MatrixXd pinv = lap.completeOrthogonalDecomposition().pseudoInverse();
    r.levels = pinv * (in - out);

    double num = 0.0;
    for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
            if (sub(a, b) != 0.0) {
                const double d = r.levels(b) - r.levels(a) - 1.0;
                num += sub(a, b) * d * d;
            }
        }
    }
    r.incoherence = num / sub.sum();
    return r;
}

} // namespace habm::testing
