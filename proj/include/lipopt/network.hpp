#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lipopt {

using Index = Eigen::Index;

enum class Activation { Elu, Softplus };

std::string_view to_string(Activation kind);
Activation parse_activation(std::string_view name);

/// sigma(x). ELU uses alpha = 1.
double activate(Activation kind, double x);
/// sigma'(x); monotone nondecreasing with values in [0, 1] for both kinds.
double activation_derivative(Activation kind, double x);

struct WeightEntry {
    Index row = 0;
    Index col = 0;
    double value = 0.0;

    friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Sparse layer matrix. Explicit zeros are dropped at construction; out of range
/// indices and repeated (row, col) pairs are rejected.
class WeightMatrix {
  public:
    using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    WeightMatrix(Index rows, Index cols, std::vector<WeightEntry> entries);
    explicit WeightMatrix(const Eigen::MatrixXd& dense);

    Index rows() const { return m_.rows(); }
    Index cols() const { return m_.cols(); }
    Index nonzeros() const { return m_.nonZeros(); }
    const Storage& matrix() const { return m_; }

    /// Entries sorted by (row, col).
    std::vector<WeightEntry> entries() const;

    friend bool operator==(const WeightMatrix& a, const WeightMatrix& b);

  private:
    Storage m_;
};

/// f_1(x) = W_1 x, f_i(x) = W_i sigma(f_{i-1}(x)); scalar output, no biases.
class Network {
  public:
    Network(std::vector<WeightMatrix> layers, Activation activation);

    Index depth() const { return static_cast<Index>(layers_.size()); }
    Index input_dim() const { return layers_.front().cols(); }
    Activation activation() const { return activation_; }
    const std::vector<WeightMatrix>& layers() const { return layers_; }
    const WeightMatrix& layer(Index i) const { return layers_[static_cast<std::size_t>(i)]; }

    /// [n_1, ..., n_d, 1]: input width, hidden widths, output width.
    std::vector<Index> widths() const;
    /// Total number of weight entries across layers.
    Index weight_count() const;

    friend bool operator==(const Network& a, const Network& b);

  private:
    std::vector<WeightMatrix> layers_;
    Activation activation_;
};

struct ForwardResult {
    double output = 0.0;
    /// f_1(x), ..., f_{d-1}(x).
    std::vector<Eigen::VectorXd> preactivations;
};

ForwardResult forward(const Network& net, const Eigen::VectorXd& x);

/// W_1^T prod Diag(sigma'(f_i(x))) W_{i+1}^T as a length n_1 vector.
Eigen::VectorXd gradient(const Network& net, const Eigen::VectorXd& x);

/// Weights of layer i are uniform in [-1/sqrt(n_i), 1/sqrt(n_i)] with n_i its input
/// width; each neuron draws its `fan_in` predecessors without replacement. A fan-in of
/// 0 connects every neuron to the whole previous layer.
Network random_network(std::span<const Index> widths, Index fan_in, std::uint64_t seed,
                       Activation activation = Activation::Elu);

/// Removes the floor(fraction * weight_count) smallest-magnitude weights globally.
/// Ties go to the earlier (layer, row, col). Throws DisconnectedNetworkError if no
/// input to output path survives.
Network prune_network(const Network& net, double fraction);

/// Keeps a single row of the final layer.
Network restrict_output(std::vector<WeightMatrix> layers, Activation activation, Index output_index);

/// l_inf -> l_inf operator norm: the largest row l1 norm.
double layer_norm_linf(const WeightMatrix& w);

/// Product of the per-layer l_inf operator norms.
double ubp(const Network& net);

struct LbsOptions {
    Index samples = 50000;
    double radius = 1.0;
    std::uint64_t seed = 0;
};

/// Input point used by sample `index` of a sampling run; sample streams are split
/// from the seed by counter so the result does not depend on evaluation order.
Eigen::VectorXd lbs_sample(Index dim, double radius, std::uint64_t seed, Index index);

/// Largest ||grad f(x)||_1 over uniform samples from [-radius, radius]^{n_1}.
double lbs(const Network& net, const LbsOptions& options = {});

struct IntervalVector {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

/// Interval enclosures of f_1, ..., f_{d-1} over the l_inf ball of radius eps around x0.
std::vector<IntervalVector> preactivation_bounds(const Network& net, const Eigen::VectorXd& x0,
                                                 double eps);

/// Bounds 0 <= l <= s <= u <= 1 on the derivative variables of each hidden layer.
struct NeuronBounds {
    std::vector<Eigen::VectorXd> lower;
    std::vector<Eigen::VectorXd> upper;
};

NeuronBounds derivative_bounds(const Network& net, const std::vector<IntervalVector>& pre);

/// The trivial bounds l = 0, u = 1 for every hidden neuron.
NeuronBounds unit_bounds(const Network& net);

// JSON I/O

/// Parses network JSON. A final layer with more than one row is accepted only when
/// `output_index` selects the row to keep.
Network load_network(std::istream& in, std::optional<Index> output_index = std::nullopt);
Network load_network_file(const std::string& path, std::optional<Index> output_index = std::nullopt);

/// Canonical JSON: entries sorted by (row, col), doubles with 17 significant digits.
std::string save_network(const Network& net);

} // namespace lipopt
