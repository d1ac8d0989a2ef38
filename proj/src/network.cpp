#include "lipopt/network.hpp"

#include "lipopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace lipopt {

std::string_view to_string(Activation kind)
{
    switch (kind) {
    case Activation::Elu:
        return "elu";
    case Activation::Softplus:
        return "softplus";
    }
    return "elu";
}

Activation parse_activation(std::string_view name)
{
    if (name == "elu")
        return Activation::Elu;
    if (name == "softplus")
        return Activation::Softplus;
    throw ParseError("unknown activation '" + std::string(name) + "'");
}

double activate(Activation kind, double x)
{
    switch (kind) {
    case Activation::Elu:
        return x >= 0.0 ? x : std::expm1(x);
    case Activation::Softplus:
        // log(1 + e^x) without overflow for large x
        return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    }
    return x;
}

double activation_derivative(Activation kind, double x)
{
    switch (kind) {
    case Activation::Elu:
        return x >= 0.0 ? 1.0 : std::exp(x);
    case Activation::Softplus:
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    }
    return 1.0;
}

// ---------------------------------------------------------------------------
// WeightMatrix

WeightMatrix::WeightMatrix(Index rows, Index cols, std::vector<WeightEntry> entries)
{
    if (rows <= 0 || cols <= 0)
        throw DimensionError("weight matrix must have positive dimensions");
    std::sort(entries.begin(), entries.end(), [](const WeightEntry& a, const WeightEntry& b) {
        return std::pair(a.row, a.col) < std::pair(b.row, b.col);
    });
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
            throw DimensionError("weight entry (" + std::to_string(e.row) + ", " +
                                 std::to_string(e.col) + ") out of range");
        if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col)
            throw DuplicateEntryError("duplicate weight entry (" + std::to_string(e.row) + ", " +
                                      std::to_string(e.col) + ")");
        if (!std::isfinite(e.value))
            throw ParseError("non-finite weight");
        if (e.value != 0.0)
            triplets.emplace_back(e.row, e.col, e.value);
    }
    m_.resize(rows, cols);
    m_.setFromTriplets(triplets.begin(), triplets.end());
    m_.makeCompressed();
}

WeightMatrix::WeightMatrix(const Eigen::MatrixXd& dense)
    : m_(dense.sparseView())
{
    if (dense.rows() == 0 || dense.cols() == 0)
        throw DimensionError("weight matrix must have positive dimensions");
    m_.makeCompressed();
}

std::vector<WeightEntry> WeightMatrix::entries() const
{
    std::vector<WeightEntry> out;
    out.reserve(static_cast<std::size_t>(m_.nonZeros()));
    for (Index r = 0; r < m_.outerSize(); ++r)
        for (Storage::InnerIterator it(m_, r); it; ++it)
            out.push_back({it.row(), it.col(), it.value()});
    return out;
}

bool operator==(const WeightMatrix& a, const WeightMatrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && a.entries() == b.entries();
}

// ---------------------------------------------------------------------------
// Network

Network::Network(std::vector<WeightMatrix> layers, Activation activation)
    : layers_(std::move(layers))
    , activation_(activation)
{
    if (layers_.size() < 2)
        throw DimensionError("network depth must be at least 2");
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        if (layers_[i].cols() != layers_[i - 1].rows())
            throw DimensionError("layer " + std::to_string(i + 1) + " has " +
                                 std::to_string(layers_[i].cols()) + " columns but layer " +
                                 std::to_string(i) + " has " + std::to_string(layers_[i - 1].rows()) +
                                 " rows");
    }
    if (layers_.back().rows() != 1)
        throw DimensionError("final layer must have exactly one row");
}

std::vector<Index> Network::widths() const
{
    std::vector<Index> w;
    w.reserve(layers_.size() + 1);
    for (const auto& l : layers_)
        w.push_back(l.cols());
    w.push_back(layers_.back().rows());
    return w;
}

Index Network::weight_count() const
{
    Index total = 0;
    for (const auto& l : layers_)
        total += l.nonzeros();
    return total;
}

bool operator==(const Network& a, const Network& b)
{
    return a.activation_ == b.activation_ && a.layers_ == b.layers_;
}

Network restrict_output(std::vector<WeightMatrix> layers, Activation activation, Index output_index)
{
    if (layers.empty())
        throw DimensionError("network has no layers");
    const auto& last = layers.back();
    if (output_index < 0 || output_index >= last.rows())
        throw DimensionError("output index " + std::to_string(output_index) + " out of range");
    std::vector<WeightEntry> kept;
    for (const auto& e : last.entries())
        if (e.row == output_index)
            kept.push_back({0, e.col, e.value});
    layers.back() = WeightMatrix(1, last.cols(), std::move(kept));
    return Network(std::move(layers), activation);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void check_input(const Network& net, const Eigen::VectorXd& x)
{
    if (x.size() != net.input_dim())
        throw DimensionError("input has length " + std::to_string(x.size()) + ", network expects " +
                             std::to_string(net.input_dim()));
}

Eigen::VectorXd apply(Activation kind, const Eigen::VectorXd& z, double (*fn)(Activation, double))
{
    Eigen::VectorXd out(z.size());
    for (Index i = 0; i < z.size(); ++i)
        out[i] = fn(kind, z[i]);
    return out;
}

} // namespace

ForwardResult forward(const Network& net, const Eigen::VectorXd& x)
{
    check_input(net, x);
    ForwardResult result;
    Eigen::VectorXd f = net.layer(0).matrix() * x;
    for (Index i = 1; i < net.depth(); ++i) {
        result.preactivations.push_back(f);
        f = net.layer(i).matrix() * apply(net.activation(), f, activate);
    }
    result.output = f[0];
    return result;
}

Eigen::VectorXd gradient(const Network& net, const Eigen::VectorXd& x)
{
    const auto fwd = forward(net, x);
    // Backward pass: g^T = W_d; g^T <- g^T Diag(sigma'(f_i)) W_i.
    Eigen::RowVectorXd g = Eigen::RowVectorXd(net.layer(net.depth() - 1).matrix().row(0));
    for (Index i = net.depth() - 2; i >= 0; --i) {
        const auto& pre = fwd.preactivations[static_cast<std::size_t>(i)];
        for (Index j = 0; j < g.size(); ++j)
            g[j] *= activation_derivative(net.activation(), pre[j]);
        g = g * net.layer(i).matrix();
    }
    return g.transpose();
}

// ---------------------------------------------------------------------------
// Generation and pruning

Network random_network(std::span<const Index> widths, Index fan_in, std::uint64_t seed,
                       Activation activation)
{
    if (widths.size() < 3)
        throw DomainError("random_network needs at least input, one hidden and output width");
    if (widths.back() != 1)
        throw DomainError("output width must be 1");
    if (fan_in < 0)
        throw DomainError("sparsity must be nonnegative");
    for (auto w : widths)
        if (w <= 0)
            throw DomainError("widths must be positive");
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
        if (fan_in > widths[i])
            throw DomainError("sparsity " + std::to_string(fan_in) + " exceeds layer width " +
                              std::to_string(widths[i]));

    std::mt19937_64 rng(seed);
    std::vector<WeightMatrix> layers;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const Index cols = widths[i];
        const Index rows = widths[i + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
        std::uniform_real_distribution<double> weight(-bound, bound);
        std::vector<Index> pool(static_cast<std::size_t>(cols));
        std::vector<WeightEntry> entries;
        for (Index r = 0; r < rows; ++r) {
            std::iota(pool.begin(), pool.end(), Index{0});
            // partial Fisher-Yates
            const Index take = fan_in == 0 ? cols : fan_in;
            for (Index k = 0; k < take; ++k) {
                std::uniform_int_distribution<Index> pick(k, cols - 1);
                std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
            }
            std::vector<Index> chosen(pool.begin(), pool.begin() + take);
            std::sort(chosen.begin(), chosen.end());
            for (Index c : chosen) {
                double v = 0.0;
                while (v == 0.0)
                    v = weight(rng);
                entries.push_back({r, c, v});
            }
        }
        layers.emplace_back(rows, cols, std::move(entries));
    }
    return Network(std::move(layers), activation);
}

namespace {

bool output_reachable(const Network& net, const std::vector<std::vector<WeightEntry>>& layers)
{
    std::vector<char> live(static_cast<std::size_t>(net.input_dim()), 1);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        std::vector<char> next(static_cast<std::size_t>(net.layers()[l].rows()), 0);
        for (const auto& e : layers[l])
            if (live[static_cast<std::size_t>(e.col)])
                next[static_cast<std::size_t>(e.row)] = 1;
        live = std::move(next);
    }
    return std::any_of(live.begin(), live.end(), [](char c) { return c != 0; });
}

} // namespace

Network prune_network(const Network& net, double fraction)
{
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw DomainError("pruning fraction must lie in [0, 1)");

    struct Ref {
        std::size_t layer;
        std::size_t pos;
        double magnitude;
    };
    std::vector<std::vector<WeightEntry>> layers;
    std::vector<Ref> refs;
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
        layers.push_back(net.layers()[l].entries());
        for (std::size_t p = 0; p < layers.back().size(); ++p)
            refs.push_back({l, p, std::abs(layers.back()[p].value)});
    }
    const auto remove = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(refs.size())));
    // refs are already in (layer, row, col) order, so a stable sort keeps that as tie-break
    std::stable_sort(refs.begin(), refs.end(),
                     [](const Ref& a, const Ref& b) { return a.magnitude < b.magnitude; });

    std::vector<std::vector<char>> drop(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l)
        drop[l].assign(layers[l].size(), 0);
    for (std::size_t i = 0; i < remove; ++i)
        drop[refs[i].layer][refs[i].pos] = 1;

    std::vector<std::vector<WeightEntry>> kept(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l)
        for (std::size_t p = 0; p < layers[l].size(); ++p)
            if (!drop[l][p])
                kept[l].push_back(layers[l][p]);

    if (!output_reachable(net, kept))
        throw DisconnectedNetworkError("pruning removes every path from the input to the output");

    std::vector<WeightMatrix> out;
    for (std::size_t l = 0; l < layers.size(); ++l)
        out.emplace_back(net.layers()[l].rows(), net.layers()[l].cols(), std::move(kept[l]));
    return Network(std::move(out), net.activation());
}

// ---------------------------------------------------------------------------
// Baselines

double layer_norm_linf(const WeightMatrix& w)
{
    double best = 0.0;
    const auto& m = w.matrix();
    for (Index r = 0; r < m.outerSize(); ++r) {
        double row = 0.0;
        for (WeightMatrix::Storage::InnerIterator it(m, r); it; ++it)
            row += std::abs(it.value());
        best = std::max(best, row);
    }
    return best;
}

double ubp(const Network& net)
{
    double product = 1.0;
    for (const auto& l : net.layers())
        product *= layer_norm_linf(l);
    return product;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Eigen::VectorXd lbs_sample(Index dim, double radius, std::uint64_t seed, Index index)
{
    std::uint64_t state = splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(index)));
    Eigen::VectorXd x(dim);
    for (Index j = 0; j < dim; ++j) {
        state = splitmix64(state);
        const double u = static_cast<double>(state >> 11) * 0x1.0p-53; // [0, 1)
        x[j] = radius * (2.0 * u - 1.0);
    }
    return x;
}

double lbs(const Network& net, const LbsOptions& options)
{
    if (options.samples < 1)
        throw DomainError("lbs needs at least one sample");
    double best = 0.0;
    for (Index i = 0; i < options.samples; ++i) {
        const auto x = lbs_sample(net.input_dim(), options.radius, options.seed, i);
        best = std::max(best, gradient(net, x).lpNorm<1>());
    }
    return best;
}

// ---------------------------------------------------------------------------
// Local bounds

std::vector<IntervalVector> preactivation_bounds(const Network& net, const Eigen::VectorXd& x0, double eps)
{
    check_input(net, x0);
    if (!(eps >= 0.0))
        throw DomainError("eps must be nonnegative");

    Eigen::VectorXd lo = x0.array() - eps;
    Eigen::VectorXd hi = x0.array() + eps;
    std::vector<IntervalVector> out;
    for (Index i = 0; i + 1 < net.depth(); ++i) {
        const auto& w = net.layer(i).matrix();
        Eigen::VectorXd new_lo = Eigen::VectorXd::Zero(w.rows());
        Eigen::VectorXd new_hi = Eigen::VectorXd::Zero(w.rows());
        for (Index r = 0; r < w.outerSize(); ++r) {
            for (WeightMatrix::Storage::InnerIterator it(w, r); it; ++it) {
                const double v = it.value();
                if (v > 0.0) {
                    new_lo[r] += v * lo[it.col()];
                    new_hi[r] += v * hi[it.col()];
                } else {
                    new_lo[r] += v * hi[it.col()];
                    new_hi[r] += v * lo[it.col()];
                }
            }
        }
        out.push_back({new_lo, new_hi});
        lo = apply(net.activation(), new_lo, activate);
        hi = apply(net.activation(), new_hi, activate);
    }
    return out;
}

NeuronBounds derivative_bounds(const Network& net, const std::vector<IntervalVector>& pre)
{
    NeuronBounds b;
    for (const auto& iv : pre) {
        b.lower.push_back(apply(net.activation(), iv.lower, activation_derivative));
        b.upper.push_back(apply(net.activation(), iv.upper, activation_derivative));
    }
    return b;
}

NeuronBounds unit_bounds(const Network& net)
{
    NeuronBounds b;
    for (Index i = 0; i + 1 < net.depth(); ++i) {
        b.lower.push_back(Eigen::VectorXd::Zero(net.layer(i).rows()));
        b.upper.push_back(Eigen::VectorXd::Ones(net.layer(i).rows()));
    }
    return b;
}

} // namespace lipopt
