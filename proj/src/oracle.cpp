#include "lipopt/oracle.hpp"

#include "lipopt/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace lipopt {

Eigen::VectorXd OracleResult::point() const
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(argmax.size()));
    for (std::size_t i = 0; i < argmax.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = argmax[i];
    return x;
}

OracleResult vertex_max(const Polynomial& p, std::size_t max_vars)
{
    if (!p.is_multilinear())
        throw DomainError("vertex oracle needs a multilinear polynomial");
    const std::size_t n = p.nvars();
    if (n > max_vars || n >= 63)
        throw ResourceLimitError("vertex oracle limited to " + std::to_string(max_vars) + " variables, got " +
                                 std::to_string(n));

    // per monomial: coefficient and count of its variables currently at 0
    std::vector<double> coeff;
    std::vector<std::uint32_t> missing;
    std::vector<std::vector<std::size_t>> touching(n);
    double value = 0.0;
    double scale = 1.0;
    for (const auto& [m, c] : p.terms()) {
        const std::size_t id = coeff.size();
        coeff.push_back(c);
        missing.push_back(static_cast<std::uint32_t>(m.factors().size()));
        for (const auto& f : m.factors())
            touching[f.first].push_back(id);
        if (m.is_constant())
            value += c;
        scale += std::abs(c);
    }
    const double tol = 1e-9 * scale;

    std::vector<std::uint8_t> vertex(n, 0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    OracleResult best;
    best.argmax = vertex;
    best.value = evaluate(p, x);

    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t g = 1; g < total; ++g) {
        const auto j = static_cast<std::size_t>(std::countr_zero(g));
        if (vertex[j] == 0) {
            vertex[j] = 1;
            for (auto id : touching[j])
                if (--missing[id] == 0)
                    value += coeff[id];
        } else {
            vertex[j] = 0;
            for (auto id : touching[j])
                if (missing[id]++ == 0)
                    value -= coeff[id];
        }
        if (value < best.value - tol)
            continue;
        // near the incumbent: settle with a fresh evaluation so ties are exact
        for (std::size_t i = 0; i < n; ++i)
            x[static_cast<Eigen::Index>(i)] = vertex[i];
        const double exact = evaluate(p, x);
        if (exact > best.value || (exact == best.value && vertex < best.argmax)) {
            best.value = exact;
            best.argmax = vertex;
        }
    }
    best.vertices = total;
    return best;
}

Eigen::VectorXd finite_diff_gradient(const Network& net, const Eigen::VectorXd& x, double h)
{
    if (!(h > 0.0))
        throw DomainError("finite difference step must be positive");
    if (x.size() != net.input_dim())
        throw DimensionError("input has wrong length");
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd plus = x;
        Eigen::VectorXd minus = x;
        plus[i] += h;
        minus[i] -= h;
        g[i] = (forward(net, plus).output - forward(net, minus).output) / (2.0 * h);
    }
    return g;
}

} // namespace lipopt
