#pragma once

#include "lipopt/lp.hpp"
#include "lipopt/network.hpp"
#include "lipopt/polynomial.hpp"
#include "lipopt/sparsity.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lipopt {

/// One Krivine product h_{alpha,beta}(x) = prod_j x_j^{alpha_j} (1 - x_j)^{beta_j}.
///
/// Stored as a sorted multiset of letters: letter 2v stands for the factor x_v and
/// letter 2v + 1 for (1 - x_v). The empty multiset is the constant 1.
class CertificateTerm {
  public:
    CertificateTerm() = default;
    explicit CertificateTerm(std::vector<std::uint32_t> letters);
    CertificateTerm(const std::vector<Monomial::Factor>& alpha, const std::vector<Monomial::Factor>& beta);

    const std::vector<std::uint32_t>& letters() const { return letters_; }
    std::uint32_t degree() const { return static_cast<std::uint32_t>(letters_.size()); }
    /// Exponents of x_v and of (1 - x_v).
    std::vector<Monomial::Factor> alpha() const;
    std::vector<Monomial::Factor> beta() const;
    /// Sorted union of supp(alpha) and supp(beta).
    std::vector<Var> support() const;

    friend auto operator<=>(const CertificateTerm&, const CertificateTerm&) = default;
    friend bool operator==(const CertificateTerm&, const CertificateTerm&) = default;

  private:
    std::vector<std::uint32_t> letters_;
};

struct CertificateTermHash {
    std::size_t operator()(const CertificateTerm& t) const noexcept;
};

inline constexpr std::size_t default_max_terms = 5'000'000;

/// Deduplicated union over cliques of all terms with degree <= k whose support lies
/// in the clique, in clique order and by increasing degree inside a clique. Includes
/// the constant term. Throws ResourceLimitError beyond `max_terms`.
std::vector<CertificateTerm> enumerate_terms(const SparsityPattern& pattern, unsigned k,
                                             std::size_t max_terms = default_max_terms);

/// |N_k^{2n}| = C(2n + k, k), the dense term count. Saturates on overflow.
std::uint64_t krivine_term_count(std::uint64_t nvars, unsigned k, bool* overflow = nullptr);

/// Distinct term count for a pattern without materializing terms: sums, over every
/// distinct support of size <= k that fits in a clique, the number of terms with
/// exactly that support.
std::uint64_t count_distinct_terms(const SparsityPattern& pattern, unsigned k);

Polynomial expand_h(const CertificateTerm& term, std::size_t nvars);

struct PruneResult {
    std::vector<CertificateTerm> terms;
    bool applied = false;
    std::size_t removed = 0;
};

/// For degree-2 hierarchies of polynomials of degree <= 2: drops the degree-2 terms on
/// {x_i, x_j} whenever p has no x_i x_j monomial (|coeff| < 1e-12). Leaves the optimum
/// unchanged. Returns the input untouched with applied = false otherwise.
PruneResult prune_degree2_terms(const Polynomial& p, std::vector<CertificateTerm> terms);

/// min lambda s.t. lambda - sum_t c_t h_t = p coefficientwise, c >= 0.
/// Column 0 is lambda (free); column t + 1 belongs to terms[t]. One row per monomial of
/// p or of some h, in graded-lex order; the constant row is always present.
struct AssembledLP {
    LinearProgram program;
    std::vector<Monomial> rows;
    std::vector<CertificateTerm> terms;
    std::size_t nvars = 0;
};

AssembledLP assemble_lp(const Polynomial& p, std::vector<CertificateTerm> terms);

LPSolution solve(const AssembledLP& lp, const SimplexOptions& options = {});

/// MPS with columns LAMBDA, C0000001, ...
void export_mps(const AssembledLP& lp, std::ostream& out);

/// lambda* - sum_t c*_t h_t rebuilt from the solution by polynomial arithmetic.
Polynomial certificate_polynomial(const AssembledLP& lp, const LPSolution& solution);

enum class BoundMode { Dense, Sparse };

std::string_view to_string(BoundMode mode);
BoundMode parse_bound_mode(std::string_view name);

struct BoundOptions {
    unsigned k = 2;
    BoundMode mode = BoundMode::Sparse;
    std::optional<NeuronBounds> bounds;
    std::size_t max_terms = default_max_terms;
    bool prune = true;
    SimplexOptions simplex;
};

struct BoundReport {
    double theta = 0.0; ///< +inf when the LP is not solved to optimality
    unsigned k = 0;
    BoundMode mode = BoundMode::Sparse;
    std::size_t terms = 0;
    std::size_t rows = 0;
    bool rip = true;
    LPStatus status = LPStatus::Infeasible;
    double seconds = 0.0;
    /// Largest coefficient mismatch of the recovered certificate (0 when not optimal).
    double residual = 0.0;
};

/// Norm-gradient polynomial (locally substituted when bounds are given), pattern,
/// terms, degree-2 pruning, LP assembly and solve.
BoundReport lipopt_bound(const Network& net, const BoundOptions& options);

/// {"theta", "k", "mode", "terms", "rows", "rip", "status", "seconds"}
std::string to_json(const BoundReport& report);

} // namespace lipopt
