#include "lipopt/polynomial.hpp"

#include "lipopt/errors.hpp"
#include "lipopt/format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lipopt {

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(std::vector<Factor> factors)
{
    std::sort(factors.begin(), factors.end());
    for (const auto& [v, e] : factors) {
        if (e == 0)
            continue;
        if (!factors_.empty() && factors_.back().first == v)
            factors_.back().second += e;
        else
            factors_.emplace_back(v, e);
    }
}

Monomial Monomial::variable(Var v, std::uint32_t exponent)
{
    Monomial m;
    if (exponent > 0)
        m.factors_.emplace_back(v, exponent);
    return m;
}

std::uint32_t Monomial::degree() const
{
    std::uint32_t d = 0;
    for (const auto& f : factors_)
        d += f.second;
    return d;
}

std::uint32_t Monomial::exponent(Var v) const
{
    auto it = std::lower_bound(factors_.begin(), factors_.end(), Factor{v, 0});
    return it != factors_.end() && it->first == v ? it->second : 0;
}

bool Monomial::is_multilinear() const
{
    return std::all_of(factors_.begin(), factors_.end(), [](const Factor& f) { return f.second <= 1; });
}

std::vector<Var> Monomial::support() const
{
    std::vector<Var> s;
    s.reserve(factors_.size());
    for (const auto& f : factors_)
        s.push_back(f.first);
    return s;
}

Monomial operator*(const Monomial& a, const Monomial& b)
{
    Monomial out;
    out.factors_.reserve(a.factors_.size() + b.factors_.size());
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() || j != b.factors_.end()) {
        if (j == b.factors_.end() || (i != a.factors_.end() && i->first < j->first))
            out.factors_.push_back(*i++);
        else if (i == a.factors_.end() || j->first < i->first)
            out.factors_.push_back(*j++);
        else {
            out.factors_.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    return out;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const
{
    const auto da = a.degree();
    const auto db = b.degree();
    if (da != db)
        return da < db;
    const auto& fa = a.factors();
    const auto& fb = b.factors();
    const std::size_t n = std::min(fa.size(), fb.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (fa[i].first != fb[i].first)
            return fa[i].first < fb[i].first; // a has a positive power of an earlier variable
        if (fa[i].second != fb[i].second)
            return fa[i].second > fb[i].second;
    }
    return false; // equal degree and equal prefix means equal
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial Polynomial::constant(std::size_t nvars, double c)
{
    Polynomial p(nvars);
    p.add_term(Monomial{}, c);
    return p;
}

Polynomial Polynomial::variable(std::size_t nvars, Var v)
{
    if (v >= nvars)
        throw DimensionError("variable index out of range");
    Polynomial p(nvars);
    p.add_term(Monomial::variable(v), 1.0);
    return p;
}

double Polynomial::coefficient(const Monomial& m) const
{
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
}

std::uint32_t Polynomial::degree() const
{
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_)
        d = std::max(d, m.degree());
    return d;
}

bool Polynomial::is_multilinear() const
{
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.first.is_multilinear(); });
}

std::vector<Var> Polynomial::variables() const
{
    std::vector<Var> vars;
    for (const auto& [m, c] : terms_)
        for (const auto& f : m.factors())
            vars.push_back(f.first);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

void Polynomial::add_term(const Monomial& m, double c)
{
    if (c == 0.0)
        return;
    if (!m.is_constant() && m.factors().back().first >= nvars_)
        throw DimensionError("monomial uses a variable beyond nvars");
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0.0)
            terms_.erase(it);
    }
}

void Polynomial::add_scaled(const Polynomial& other, double scale)
{
    if (other.nvars_ != nvars_)
        throw DimensionError("polynomials have different numbers of variables");
    for (const auto& [m, c] : other.terms_)
        add_term(m, scale * c);
}

Polynomial& Polynomial::operator+=(const Polynomial& other)
{
    add_scaled(other, 1.0);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other)
{
    add_scaled(other, -1.0);
    return *this;
}

Polynomial& Polynomial::operator*=(double s)
{
    if (s == 0.0) {
        terms_.clear();
        return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
        it->second *= s;
        it = it->second == 0.0 ? terms_.erase(it) : std::next(it);
    }
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    if (a.nvars_ != b.nvars_)
        throw DimensionError("polynomials have different numbers of variables");
    Polynomial out(a.nvars_);
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_)
            out.add_term(ma * mb, ca * cb);
    return out;
}

double evaluate(const Polynomial& p, const Eigen::VectorXd& x)
{
    if (static_cast<std::size_t>(x.size()) != p.nvars())
        throw DimensionError("evaluation point has wrong length");
    double sum = 0.0;
    for (const auto& [m, c] : p.terms()) {
        double term = c;
        for (const auto& [v, e] : m.factors())
            for (std::uint32_t k = 0; k < e; ++k)
                term *= x[v];
        sum += term;
    }
    return sum;
}

double max_coefficient_difference(const Polynomial& a, const Polynomial& b)
{
    double worst = 0.0;
    for (const auto& [m, c] : a.terms())
        worst = std::max(worst, std::abs(c - b.coefficient(m)));
    for (const auto& [m, c] : b.terms())
        if (a.terms().find(m) == a.terms().end())
            worst = std::max(worst, std::abs(c));
    return worst;
}

std::string debug_dump(const Polynomial& p)
{
    std::ostringstream out;
    for (const auto& [m, c] : p.terms()) {
        out << format_double(c) << ':';
        for (const auto& [v, e] : m.factors())
            out << ' ' << v << '^' << e;
        out << '\n';
    }
    return out.str();
}

Polynomial substitute_affine(const Polynomial& p, const Eigen::VectorXd& offset, const Eigen::VectorXd& scale)
{
    const auto n = static_cast<Eigen::Index>(p.nvars());
    if (offset.size() != n || scale.size() != n)
        throw DimensionError("substitution vectors have wrong length");

    Polynomial out(p.nvars());
    for (const auto& [m, c] : p.terms()) {
        // expand prod_v (a_v + b_v x_v)^{e_v}, one variable at a time
        std::vector<std::pair<Monomial, double>> partial{{Monomial{}, c}};
        for (const auto& [v, e] : m.factors()) {
            const double a = offset[v];
            const double b = scale[v];
            std::vector<std::pair<Monomial, double>> next;
            double binom = 1.0;
            for (std::uint32_t j = 0; j <= e; ++j) {
                // C(e, j) a^{e-j} b^j x_v^j
                const double w = binom * std::pow(a, static_cast<double>(e - j)) * std::pow(b, static_cast<double>(j));
                if (w != 0.0) {
                    const auto xv = Monomial::variable(v, j);
                    for (const auto& [pm, pc] : partial)
                        next.emplace_back(pm * xv, pc * w);
                }
                binom = binom * static_cast<double>(e - j) / static_cast<double>(j + 1);
            }
            partial = std::move(next);
        }
        for (const auto& [pm, pc] : partial)
            out.add_term(pm, pc);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Network polynomials

VariableIndexing::VariableIndexing(const Network& net)
{
    sizes_.push_back(static_cast<std::size_t>(net.input_dim()));
    for (Index i = 0; i + 1 < net.depth(); ++i)
        sizes_.push_back(static_cast<std::size_t>(net.layer(i).rows()));
    for (auto s : sizes_) {
        offsets_.push_back(total_);
        total_ += s;
    }
}

std::pair<std::size_t, std::size_t> VariableIndexing::locate(Var v) const
{
    if (v >= total_)
        throw DimensionError("variable index out of range");
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), static_cast<std::size_t>(v));
    const auto layer = static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
    return {layer, v - offsets_[layer]};
}

Polynomial norm_gradient_polynomial(const Network& net)
{
    const VariableIndexing idx(net);
    const std::size_t n = idx.total();

    // v_j = 2 s_{0,j} - 1, then v <- Diag(s_i) W_i v layer by layer
    std::vector<Polynomial> v;
    for (std::size_t j = 0; j < idx.layer_size(0); ++j) {
        Polynomial t(n);
        t.add_term(Monomial::variable(idx.index(0, j)), 2.0);
        t.add_term(Monomial{}, -1.0);
        v.push_back(std::move(t));
    }
    for (Index i = 0; i + 1 < net.depth(); ++i) {
        const auto& w = net.layer(i).matrix();
        const auto layer = static_cast<std::size_t>(i + 1);
        std::vector<Polynomial> next;
        next.reserve(static_cast<std::size_t>(w.rows()));
        for (Index r = 0; r < w.outerSize(); ++r) {
            Polynomial acc(n);
            for (WeightMatrix::Storage::InnerIterator it(w, r); it; ++it)
                acc.add_scaled(v[static_cast<std::size_t>(it.col())], it.value());
            const auto s = Monomial::variable(idx.index(layer, static_cast<std::size_t>(r)));
            Polynomial shifted(n);
            for (const auto& [m, c] : acc.terms())
                shifted.add_term(m * s, c);
            next.push_back(std::move(shifted));
        }
        v = std::move(next);
    }
    Polynomial p(n);
    const auto& last = net.layer(net.depth() - 1).matrix();
    for (WeightMatrix::Storage::InnerIterator it(last, 0); it; ++it)
        p.add_scaled(v[static_cast<std::size_t>(it.col())], it.value());
    return p;
}

namespace {

std::pair<Eigen::VectorXd, Eigen::VectorXd> local_substitution(const Network& net, const NeuronBounds& bounds)
{
    const VariableIndexing idx(net);
    if (bounds.lower.size() != idx.layer_count() - 1 || bounds.upper.size() != idx.layer_count() - 1)
        throw DimensionError("neuron bounds must cover every hidden layer");
    Eigen::VectorXd offset = Eigen::VectorXd::Zero(static_cast<Index>(idx.total()));
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(static_cast<Index>(idx.total()));
    for (std::size_t layer = 1; layer < idx.layer_count(); ++layer) {
        const auto& lo = bounds.lower[layer - 1];
        const auto& hi = bounds.upper[layer - 1];
        if (static_cast<std::size_t>(lo.size()) != idx.layer_size(layer) ||
            static_cast<std::size_t>(hi.size()) != idx.layer_size(layer))
            throw DimensionError("neuron bounds have wrong width");
        for (std::size_t j = 0; j < idx.layer_size(layer); ++j) {
            const auto jj = static_cast<Index>(j);
            if (hi[jj] < lo[jj])
                throw DomainError("neuron bound has upper < lower");
            const auto v = static_cast<Index>(idx.index(layer, j));
            offset[v] = lo[jj];
            scale[v] = hi[jj] - lo[jj];
        }
    }
    return {offset, scale};
}

} // namespace

Polynomial local_norm_gradient_polynomial(const Network& net, const NeuronBounds& bounds)
{
    const auto [offset, scale] = local_substitution(net, bounds);
    return substitute_affine(norm_gradient_polynomial(net), offset, scale);
}

Eigen::VectorXd map_local_point(const Network& net, const NeuronBounds& bounds, const Eigen::VectorXd& local)
{
    const auto [offset, scale] = local_substitution(net, bounds);
    if (local.size() != offset.size())
        throw DimensionError("local point has wrong length");
    return offset + scale.cwiseProduct(local);
}

} // namespace lipopt
