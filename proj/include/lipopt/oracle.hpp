#pragma once

#include "lipopt/network.hpp"
#include "lipopt/polynomial.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace lipopt {

struct OracleResult {
    double value = 0.0;
    /// 0/1 vertex attaining the maximum; lexicographically smallest among ties.
    std::vector<std::uint8_t> argmax;
    std::uint64_t vertices = 0;

    Eigen::VectorXd point() const;
};

inline constexpr std::size_t default_vertex_cap = 22;

/// Exact maximum of a multilinear polynomial over [0,1]^n by enumerating {0,1}^n in
/// Gray-code order. Throws DomainError on non-multilinear input and
/// ResourceLimitError when nvars exceeds `max_vars`.
OracleResult vertex_max(const Polynomial& p, std::size_t max_vars = default_vertex_cap);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h.
Eigen::VectorXd finite_diff_gradient(const Network& net, const Eigen::VectorXd& x, double h = 1e-5);

} // namespace lipopt
