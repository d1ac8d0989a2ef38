#pragma once

#include "lipopt/network.hpp"
#include "lipopt/polynomial.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lipopt {

/// Layered DAG over neurons of layers 0..d-1; an edge s_{i,j} -> s_{i+1,k} for every
/// nonzero [W_{i+1}]_{k,j}. The output layer is not part of the graph.
class CompGraph {
  public:
    explicit CompGraph(const Network& net);

    std::size_t layer_count() const { return widths_.size(); }
    std::size_t layer_width(std::size_t layer) const { return widths_[layer]; }
    std::size_t edge_count() const;

    /// Predecessors in layer-1 of neuron j in `layer` (layer >= 1), ascending.
    const std::vector<std::size_t>& predecessors(std::size_t layer, std::size_t j) const
    {
        return preds_[layer][j];
    }

    /// All edges as ((layer, j), (layer+1, k)) sorted.
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>>>
    edges() const;

  private:
    std::vector<std::size_t> widths_;
    std::vector<std::vector<std::vector<std::size_t>>> preds_;
};

CompGraph computational_graph(const Network& net);

/// Ordered cliques of global variable indices; each clique is sorted ascending.
struct SparsityPattern {
    std::vector<std::vector<Var>> cliques;

    std::size_t size() const { return cliques.size(); }
};

/// One clique per last-hidden-layer neuron: the neuron and all of its ancestors,
/// ordered by neuron index.
SparsityPattern induced_pattern(const CompGraph& g, const VariableIndexing& indexing);

/// The single clique {0, ..., nvars-1}.
SparsityPattern dense_pattern(std::size_t nvars);

struct ValidationReport {
    bool covers = false;      ///< every variable of p lies in some clique
    bool decomposes = false;  ///< every monomial of p fits inside some clique
    bool running_intersection = false;

    bool valid() const { return covers && decomposes && running_intersection; }
};

/// Checks the clique conditions against p; never throws on a failed check.
ValidationReport validate_pattern(const SparsityPattern& pattern, const Polynomial& p);

/// Running-intersection property for the given order.
bool has_running_intersection(const SparsityPattern& pattern);

/// Index of the first clique containing the support of m, or -1.
long first_covering_clique(const SparsityPattern& pattern, const Monomial& m);

struct CliqueStats {
    std::size_t cliques = 0;
    std::size_t largest = 0;
    /// sum_i C(2|I_i| + k, k); saturates at UINT64_MAX.
    std::uint64_t term_bound = 0;
    bool saturated = false;
    unsigned k = 0;
};

CliqueStats clique_stats(const SparsityPattern& pattern, unsigned k);

/// C(n, k) with saturation; `overflow` is set when the value does not fit.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k, bool* overflow = nullptr);

/// {"cliques": [[...], ...], "rip": bool}
std::string pattern_json(const SparsityPattern& pattern);

} // namespace lipopt
