#pragma once

#include "lipopt/network.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lipopt {

using Var = std::uint32_t;

/// x^gamma stored as sorted (variable, exponent) pairs with positive exponents.
class Monomial {
  public:
    using Factor = std::pair<Var, std::uint32_t>;

    Monomial() = default;
    /// Sorts, merges repeated variables and drops zero exponents.
    explicit Monomial(std::vector<Factor> factors);

    static Monomial variable(Var v, std::uint32_t exponent = 1);

    const std::vector<Factor>& factors() const { return factors_; }
    bool is_constant() const { return factors_.empty(); }
    std::uint32_t degree() const;
    std::uint32_t exponent(Var v) const;
    bool is_multilinear() const;
    std::vector<Var> support() const;

    friend Monomial operator*(const Monomial& a, const Monomial& b);
    friend bool operator==(const Monomial&, const Monomial&) = default;

  private:
    std::vector<Factor> factors_;
};

/// Graded lexicographic order: lower degree first; within a degree, x0 before x1
/// and x0^2 before x0 x1.
struct GradedLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Sparse real polynomial in `nvars` variables. Exactly-zero coefficients are never stored.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, double, GradedLexLess>;

    explicit Polynomial(std::size_t nvars = 0)
        : nvars_(nvars)
    {
    }

    static Polynomial constant(std::size_t nvars, double c);
    static Polynomial variable(std::size_t nvars, Var v);

    std::size_t nvars() const { return nvars_; }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    double coefficient(const Monomial& m) const;
    std::uint32_t degree() const;
    bool is_multilinear() const;
    /// Sorted variables appearing with a nonzero coefficient somewhere.
    std::vector<Var> variables() const;

    /// this += c * m
    void add_term(const Monomial& m, double c);
    /// this += scale * other
    void add_scaled(const Polynomial& other, double scale);

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(double s);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

    friend bool operator==(const Polynomial& a, const Polynomial& b)
    {
        return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
    }

  private:
    std::size_t nvars_;
    TermMap terms_;
};

/// sum of coeff * x^gamma.
double evaluate(const Polynomial& p, const Eigen::VectorXd& x);

/// Largest absolute coefficient of a - b.
double max_coefficient_difference(const Polynomial& a, const Polynomial& b);

/// One line per term in graded-lex order: "coeff: i1^e1 i2^e2 ...".
std::string debug_dump(const Polynomial& p);

/// x_v -> offset[v] + scale[v] * x_v for every variable, re-expanded.
/// A zero scale eliminates the variable.
Polynomial substitute_affine(const Polynomial& p, const Eigen::VectorXd& offset, const Eigen::VectorXd& scale);

/// Global variable numbering x = [s_0, ..., s_{d-1}]: layer 0 holds the n_1 input
/// variables, layer i >= 1 the n_{i+1} derivative variables of hidden layer i.
class VariableIndexing {
  public:
    explicit VariableIndexing(const Network& net);

    std::size_t layer_count() const { return sizes_.size(); }
    std::size_t layer_size(std::size_t layer) const { return sizes_[layer]; }
    std::size_t offset(std::size_t layer) const { return offsets_[layer]; }
    Var index(std::size_t layer, std::size_t neuron) const
    {
        return static_cast<Var>(offsets_[layer] + neuron);
    }
    std::size_t total() const { return total_; }
    /// (layer, neuron) of a global variable.
    std::pair<std::size_t, std::size_t> locate(Var v) const;

  private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

/// (2 s_0 - 1)^T W_1^T prod_i Diag(s_i) W_{i+1}^T expanded over [0,1]^n.
Polynomial norm_gradient_polynomial(const Network& net);

/// The norm-gradient polynomial after s = l + (u - l) s~ on every hidden variable.
/// Input variables are left untouched. Throws DomainError if u < l anywhere.
Polynomial local_norm_gradient_polynomial(const Network& net, const NeuronBounds& bounds);

/// Maps a point of the substituted box back to the original one: s = l + (u - l) s~.
Eigen::VectorXd map_local_point(const Network& net, const NeuronBounds& bounds, const Eigen::VectorXd& local);

} // namespace lipopt
