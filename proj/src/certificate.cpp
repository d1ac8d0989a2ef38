#include "lipopt/certificate.hpp"

#include "lipopt/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

namespace lipopt {

// ---------------------------------------------------------------------------
// CertificateTerm

CertificateTerm::CertificateTerm(std::vector<std::uint32_t> letters)
    : letters_(std::move(letters))
{
    std::sort(letters_.begin(), letters_.end());
}

CertificateTerm::CertificateTerm(const std::vector<Monomial::Factor>& alpha,
                                 const std::vector<Monomial::Factor>& beta)
{
    for (const auto& [v, e] : alpha)
        letters_.insert(letters_.end(), e, 2 * v);
    for (const auto& [v, e] : beta)
        letters_.insert(letters_.end(), e, 2 * v + 1);
    std::sort(letters_.begin(), letters_.end());
}

namespace {

std::vector<Monomial::Factor> letters_to_factors(const std::vector<std::uint32_t>& letters, std::uint32_t parity)
{
    std::vector<Monomial::Factor> out;
    for (auto l : letters) {
        if ((l & 1U) != parity)
            continue;
        const Var v = l >> 1U;
        if (!out.empty() && out.back().first == v)
            ++out.back().second;
        else
            out.emplace_back(v, 1);
    }
    return out;
}

} // namespace

std::vector<Monomial::Factor> CertificateTerm::alpha() const { return letters_to_factors(letters_, 0); }
std::vector<Monomial::Factor> CertificateTerm::beta() const { return letters_to_factors(letters_, 1); }

std::vector<Var> CertificateTerm::support() const
{
    std::vector<Var> s;
    for (auto l : letters_)
        if (s.empty() || s.back() != (l >> 1U))
            s.push_back(l >> 1U);
    return s;
}

std::size_t CertificateTermHash::operator()(const CertificateTerm& t) const noexcept
{
    std::uint64_t h = 1469598103934665603ULL;
    for (auto l : t.letters()) {
        h ^= l + 1;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// Enumeration and counting

std::vector<CertificateTerm> enumerate_terms(const SparsityPattern& pattern, unsigned k, std::size_t max_terms)
{
    if (k < 1)
        throw DomainError("hierarchy degree must be at least 1");
    std::vector<CertificateTerm> out;
    std::unordered_set<CertificateTerm, CertificateTermHash> seen;

    auto emit = [&](std::vector<std::uint32_t> letters) {
        CertificateTerm t(std::move(letters));
        if (seen.insert(t).second) {
            if (out.size() >= max_terms)
                throw ResourceLimitError("certificate needs more than " + std::to_string(max_terms) +
                                         " terms at degree " + std::to_string(k));
            out.push_back(std::move(t));
        }
    };

    for (const auto& clique : pattern.cliques) {
        std::vector<std::uint32_t> alphabet;
        for (auto v : clique) {
            alphabet.push_back(2 * v);
            alphabet.push_back(2 * v + 1);
        }
        const std::size_t a = alphabet.size();
        emit({});
        for (unsigned deg = 1; deg <= k && a > 0; ++deg) {
            // nondecreasing index sequences of length deg over the alphabet
            std::vector<std::size_t> idx(deg, 0);
            for (;;) {
                std::vector<std::uint32_t> letters(deg);
                for (unsigned i = 0; i < deg; ++i)
                    letters[i] = alphabet[idx[i]];
                emit(std::move(letters));
                int pos = static_cast<int>(deg) - 1;
                while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == a - 1)
                    --pos;
                if (pos < 0)
                    break;
                const auto next = idx[static_cast<std::size_t>(pos)] + 1;
                for (auto i = static_cast<std::size_t>(pos); i < deg; ++i)
                    idx[i] = next;
            }
        }
    }
    return out;
}

std::uint64_t krivine_term_count(std::uint64_t nvars, unsigned k, bool* overflow)
{
    return binomial(2 * nvars + k, k, overflow);
}

std::uint64_t count_distinct_terms(const SparsityPattern& pattern, unsigned k)
{
    // terms of degree <= k using every variable of a support of size s:
    // f(s) = sum_j (-1)^j C(s, j) C(2(s - j) + k, k)
    std::vector<long double> exact(k + 1, 0.0L);
    for (unsigned s = 0; s <= k; ++s) {
        long double f = 0.0L;
        for (unsigned j = 0; j <= s; ++j) {
            const long double term = static_cast<long double>(binomial(s, j)) *
                                     static_cast<long double>(binomial(2 * (s - j) + k, k));
            f += (j % 2 == 0) ? term : -term;
        }
        exact[s] = f;
    }

    std::set<std::vector<Var>> supports;
    for (const auto& clique : pattern.cliques) {
        const std::size_t c = clique.size();
        // every subset of size <= k
        for (unsigned size = 0; size <= k && size <= c; ++size) {
            std::vector<std::size_t> idx(size);
            for (unsigned i = 0; i < size; ++i)
                idx[i] = i;
            for (;;) {
                std::vector<Var> s(size);
                for (unsigned i = 0; i < size; ++i)
                    s[i] = clique[idx[i]];
                supports.insert(std::move(s));
                int pos = static_cast<int>(size) - 1;
                while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == c - size + static_cast<std::size_t>(pos))
                    --pos;
                if (pos < 0)
                    break;
                ++idx[static_cast<std::size_t>(pos)];
                for (auto i = static_cast<std::size_t>(pos) + 1; i < size; ++i)
                    idx[i] = idx[i - 1] + 1;
            }
        }
    }
    std::uint64_t total = 0;
    for (const auto& s : supports)
        total += static_cast<std::uint64_t>(std::llround(exact[s.size()]));
    return total;
}

// ---------------------------------------------------------------------------
// Expansion and pruning

Polynomial expand_h(const CertificateTerm& term, std::size_t nvars)
{
    std::vector<Monomial::Factor> alpha = term.alpha();
    Polynomial out(nvars);
    out.add_term(Monomial(alpha), 1.0);
    for (const auto& [v, e] : term.beta()) {
        // (1 - x_v)^e = sum_j C(e, j) (-1)^j x_v^j
        Polynomial factor(nvars);
        double binom = 1.0;
        for (std::uint32_t j = 0; j <= e; ++j) {
            factor.add_term(Monomial::variable(v, j), (j % 2 == 0 ? 1.0 : -1.0) * binom);
            binom = binom * static_cast<double>(e - j) / static_cast<double>(j + 1);
        }
        out = out * factor;
    }
    return out;
}

PruneResult prune_degree2_terms(const Polynomial& p, std::vector<CertificateTerm> terms)
{
    PruneResult result;
    const bool quadratic = std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.degree() <= 2; });
    if (!quadratic || p.degree() > 2) {
        result.terms = std::move(terms);
        return result;
    }
    result.applied = true;
    for (auto& t : terms) {
        if (t.degree() == 2) {
            const auto& l = t.letters();
            const Monomial pair({{l[0] >> 1U, 1}, {l[1] >> 1U, 1}});
            if (std::abs(p.coefficient(pair)) < 1e-12) {
                ++result.removed;
                continue;
            }
        }
        result.terms.push_back(std::move(t));
    }
    return result;
}

// ---------------------------------------------------------------------------
// LP assembly

AssembledLP assemble_lp(const Polynomial& p, std::vector<CertificateTerm> terms)
{
    if (terms.empty())
        throw DomainError("certificate needs at least one term");
    const std::size_t n = p.nvars();
    std::vector<Polynomial> expanded;
    expanded.reserve(terms.size());
    std::map<Monomial, Eigen::Index, GradedLexLess> row_index;
    row_index.emplace(Monomial{}, 0);
    for (const auto& [m, c] : p.terms())
        row_index.emplace(m, 0);
    for (const auto& t : terms) {
        for (auto v : t.support())
            if (v >= n)
                throw DimensionError("certificate term uses a variable beyond nvars");
        expanded.push_back(expand_h(t, n));
        for (const auto& [m, c] : expanded.back().terms())
            row_index.emplace(m, 0);
    }

    AssembledLP lp;
    lp.nvars = n;
    Eigen::Index r = 0;
    for (auto& [m, idx] : row_index) {
        idx = r++;
        lp.rows.push_back(m);
    }
    const auto rows = static_cast<Eigen::Index>(lp.rows.size());
    const auto cols = static_cast<Eigen::Index>(terms.size()) + 1;

    std::vector<Eigen::Triplet<double>> trip;
    trip.emplace_back(row_index.at(Monomial{}), 0, 1.0);
    for (std::size_t t = 0; t < expanded.size(); ++t)
        for (const auto& [m, c] : expanded[t].terms())
            trip.emplace_back(row_index.at(m), static_cast<Eigen::Index>(t) + 1, -c);

    lp.program.A.resize(rows, cols);
    lp.program.A.setFromTriplets(trip.begin(), trip.end());
    lp.program.A.makeCompressed();
    lp.program.b = Eigen::VectorXd::Zero(rows);
    for (const auto& [m, c] : p.terms())
        lp.program.b[row_index.at(m)] = c;
    lp.program.cost = Eigen::VectorXd::Zero(cols);
    lp.program.cost[0] = 1.0;
    lp.program.free.assign(static_cast<std::size_t>(cols), false);
    lp.program.free[0] = true;
    lp.terms = std::move(terms);
    return lp;
}

LPSolution solve(const AssembledLP& lp, const SimplexOptions& options) { return solve(lp.program, options); }

void export_mps(const AssembledLP& lp, std::ostream& out)
{
    std::vector<std::string> names;
    names.reserve(lp.terms.size() + 1);
    names.emplace_back("LAMBDA");
    for (std::size_t t = 0; t < lp.terms.size(); ++t)
        names.push_back(numbered_name('C', t + 1));
    write_mps(lp.program, out, names);
}

Polynomial certificate_polynomial(const AssembledLP& lp, const LPSolution& solution)
{
    if (solution.x.size() != lp.program.cols())
        throw DimensionError("solution does not match the assembled LP");
    Polynomial out = Polynomial::constant(lp.nvars, solution.x[0]);
    for (std::size_t t = 0; t < lp.terms.size(); ++t) {
        const double c = solution.x[static_cast<Eigen::Index>(t) + 1];
        if (c != 0.0)
            out.add_scaled(expand_h(lp.terms[t], lp.nvars), -c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// End-to-end bound

std::string_view to_string(BoundMode mode) { return mode == BoundMode::Dense ? "dense" : "sparse"; }

BoundMode parse_bound_mode(std::string_view name)
{
    if (name == "dense")
        return BoundMode::Dense;
    if (name == "sparse")
        return BoundMode::Sparse;
    throw ParseError("unknown mode '" + std::string(name) + "'");
}

BoundReport lipopt_bound(const Network& net, const BoundOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    BoundReport report;
    report.k = options.k;
    report.mode = options.mode;

    const Polynomial p = options.bounds ? local_norm_gradient_polynomial(net, *options.bounds)
                                        : norm_gradient_polynomial(net);
    const VariableIndexing idx(net);
    const SparsityPattern pattern = options.mode == BoundMode::Dense
                                        ? dense_pattern(idx.total())
                                        : induced_pattern(computational_graph(net), idx);
    report.rip = has_running_intersection(pattern);

    auto terms = enumerate_terms(pattern, options.k, options.max_terms);
    if (options.prune && options.k == 2)
        terms = prune_degree2_terms(p, std::move(terms)).terms;

    const AssembledLP lp = assemble_lp(p, std::move(terms));
    report.terms = lp.terms.size();
    report.rows = lp.rows.size();

    const LPSolution sol = solve(lp, options.simplex);
    report.status = sol.status;
    if (sol.status == LPStatus::Optimal) {
        report.theta = sol.objective;
        report.residual = max_coefficient_difference(certificate_polynomial(lp, sol), p);
    } else {
        report.theta = std::numeric_limits<double>::infinity();
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string to_json(const BoundReport& report)
{
    nlohmann::ordered_json j;
    if (std::isfinite(report.theta))
        j["theta"] = report.theta;
    else
        j["theta"] = "inf";
    j["k"] = report.k;
    j["mode"] = std::string(to_string(report.mode));
    j["terms"] = report.terms;
    j["rows"] = report.rows;
    j["rip"] = report.rip;
    j["status"] = std::string(to_string(report.status));
    j["seconds"] = report.seconds;
    return j.dump();
}

} // namespace lipopt
