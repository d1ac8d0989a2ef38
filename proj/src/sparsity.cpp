#include "lipopt/sparsity.hpp"

#include "lipopt/errors.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace lipopt {

CompGraph::CompGraph(const Network& net)
{
    widths_.push_back(static_cast<std::size_t>(net.input_dim()));
    preds_.emplace_back(widths_.back());
    for (Index i = 0; i + 1 < net.depth(); ++i) {
        const auto& w = net.layer(i).matrix();
        widths_.push_back(static_cast<std::size_t>(w.rows()));
        std::vector<std::vector<std::size_t>> layer(static_cast<std::size_t>(w.rows()));
        for (Index r = 0; r < w.outerSize(); ++r)
            for (WeightMatrix::Storage::InnerIterator it(w, r); it; ++it)
                layer[static_cast<std::size_t>(r)].push_back(static_cast<std::size_t>(it.col()));
        preds_.push_back(std::move(layer));
    }
}

std::size_t CompGraph::edge_count() const
{
    std::size_t total = 0;
    for (const auto& layer : preds_)
        for (const auto& p : layer)
            total += p.size();
    return total;
}

std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>>>
CompGraph::edges() const
{
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>>> out;
    for (std::size_t layer = 1; layer < preds_.size(); ++layer)
        for (std::size_t k = 0; k < preds_[layer].size(); ++k)
            for (auto j : preds_[layer][k])
                out.push_back({{layer - 1, j}, {layer, k}});
    std::sort(out.begin(), out.end());
    return out;
}

CompGraph computational_graph(const Network& net) { return CompGraph(net); }

SparsityPattern induced_pattern(const CompGraph& g, const VariableIndexing& indexing)
{
    if (g.layer_count() != indexing.layer_count())
        throw DimensionError("graph and variable indexing disagree on depth");
    const std::size_t last = g.layer_count() - 1;
    SparsityPattern pattern;
    for (std::size_t i = 0; i < g.layer_width(last); ++i) {
        std::vector<Var> clique{indexing.index(last, i)};
        // reverse BFS one layer at a time
        std::vector<std::size_t> frontier{i};
        for (std::size_t layer = last; layer > 0; --layer) {
            std::vector<char> seen(g.layer_width(layer - 1), 0);
            for (auto k : frontier)
                for (auto j : g.predecessors(layer, k))
                    seen[j] = 1;
            frontier.clear();
            for (std::size_t j = 0; j < seen.size(); ++j)
                if (seen[j]) {
                    frontier.push_back(j);
                    clique.push_back(indexing.index(layer - 1, j));
                }
        }
        std::sort(clique.begin(), clique.end());
        pattern.cliques.push_back(std::move(clique));
    }
    return pattern;
}

SparsityPattern dense_pattern(std::size_t nvars)
{
    SparsityPattern pattern;
    std::vector<Var> all(nvars);
    for (std::size_t v = 0; v < nvars; ++v)
        all[v] = static_cast<Var>(v);
    pattern.cliques.push_back(std::move(all));
    return pattern;
}

long first_covering_clique(const SparsityPattern& pattern, const Monomial& m)
{
    const auto support = m.support();
    for (std::size_t i = 0; i < pattern.cliques.size(); ++i) {
        const auto& c = pattern.cliques[i];
        if (std::includes(c.begin(), c.end(), support.begin(), support.end()))
            return static_cast<long>(i);
    }
    return -1;
}

bool has_running_intersection(const SparsityPattern& pattern)
{
    std::vector<Var> seen;
    for (std::size_t i = 0; i < pattern.cliques.size(); ++i) {
        const auto& next = pattern.cliques[i];
        if (i > 0) {
            std::vector<Var> overlap;
            std::set_intersection(next.begin(), next.end(), seen.begin(), seen.end(), std::back_inserter(overlap));
            bool contained = false;
            for (std::size_t l = 0; l < i && !contained; ++l) {
                const auto& prev = pattern.cliques[l];
                contained = std::includes(prev.begin(), prev.end(), overlap.begin(), overlap.end());
            }
            if (!contained)
                return false;
        }
        std::vector<Var> merged;
        std::set_union(seen.begin(), seen.end(), next.begin(), next.end(), std::back_inserter(merged));
        seen = std::move(merged);
    }
    return true;
}

ValidationReport validate_pattern(const SparsityPattern& pattern, const Polynomial& p)
{
    ValidationReport report;
    std::vector<Var> all;
    for (const auto& c : pattern.cliques) {
        std::vector<Var> merged;
        std::set_union(all.begin(), all.end(), c.begin(), c.end(), std::back_inserter(merged));
        all = std::move(merged);
    }
    const auto vars = p.variables();
    report.covers = std::includes(all.begin(), all.end(), vars.begin(), vars.end());
    report.decomposes = std::all_of(p.terms().begin(), p.terms().end(), [&](const auto& t) {
        return first_covering_clique(pattern, t.first) >= 0;
    });
    report.running_intersection = has_running_intersection(pattern);
    return report;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k, bool* overflow)
{
    if (overflow)
        *overflow = false;
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    // r_i = C(n - k + i, i) stays an integer at every step
    unsigned __int128 r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > std::numeric_limits<std::uint64_t>::max()) {
            if (overflow)
                *overflow = true;
            return std::numeric_limits<std::uint64_t>::max();
        }
    }
    return static_cast<std::uint64_t>(r);
}

CliqueStats clique_stats(const SparsityPattern& pattern, unsigned k)
{
    if (k < 1)
        throw DomainError("hierarchy degree must be at least 1");
    CliqueStats stats;
    stats.k = k;
    stats.cliques = pattern.cliques.size();
    constexpr auto cap = std::numeric_limits<std::uint64_t>::max();
    for (const auto& c : pattern.cliques) {
        stats.largest = std::max(stats.largest, c.size());
        bool overflow = false;
        const auto count = binomial(2 * c.size() + k, k, &overflow);
        if (overflow || stats.term_bound > cap - count) {
            stats.saturated = true;
            stats.term_bound = cap;
        } else if (!stats.saturated) {
            stats.term_bound += count;
        }
    }
    return stats;
}

std::string pattern_json(const SparsityPattern& pattern)
{
    std::ostringstream out;
    out << "{\"cliques\": [";
    for (std::size_t i = 0; i < pattern.cliques.size(); ++i) {
        out << (i ? ", " : "") << '[';
        for (std::size_t j = 0; j < pattern.cliques[i].size(); ++j)
            out << (j ? ", " : "") << pattern.cliques[i][j];
        out << ']';
    }
    out << "], \"rip\": " << (has_running_intersection(pattern) ? "true" : "false") << "}";
    return out.str();
}

} // namespace lipopt
