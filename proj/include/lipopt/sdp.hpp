#pragma once

#include "lipopt/network.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>
#include <string>
#include <vector>

namespace lipopt {

/// z^T Q z + q^T z + c over the lifted variable z (y = [1, z]). Q is symmetric.
struct QuadraticForm {
    Eigen::SparseMatrix<double> quadratic;
    Eigen::VectorXd linear;
    double constant = 0.0;

    double operator()(const Eigen::VectorXd& z) const;
};

/// Normalized problem over s in [-1, 1]^n:
///   max 2^{1-d} s_0^T W_1^T prod_i Diag(s_i + 1) W_{i+1}^T
/// written as a QCQP in z = [s_0, s_1, ...] (d = 2) or z = [s_0, s_1, s_2, vec(s_1 s_2^T)]
/// (d = 3, entry (a, b) of the lifted block at offset a * n_3 + b).
struct QCQP {
    std::vector<Eigen::Index> block_sizes; ///< s_0, s_1, [s_2, s_12]
    QuadraticForm objective;               ///< maximized
    std::vector<QuadraticForm> constraints; ///< each <= 0: boxes first, then lifting pairs
    std::size_t box_count = 0;
    std::size_t lifting_count = 0;         ///< lifted entries; each gives two constraints

    Eigen::Index dim() const; ///< dimension of y = [1, z]
};

/// d in {2, 3}; throws DomainError otherwise.
QCQP qcqp_reformulate(const Network& net);

/// z built from s = [s_0, s_1, ...] with the lifted block filled exactly.
Eigen::VectorXd lift_point(const QCQP& q, const Eigen::VectorXd& s);

/// max <C, X> s.t. <A_i, X> <= 0, X[0,0] = 1, X psd, over X of size dim(y).
struct ShorSDP {
    Eigen::Index dim = 0;
    Eigen::SparseMatrix<double> objective;
    std::vector<Eigen::SparseMatrix<double>> inequalities;

    /// Total linear constraints including the normalization X[0,0] = 1.
    std::size_t constraint_count() const { return inequalities.size() + 1; }
};

/// [[c, q^T/2], [q/2, Q]] for each form.
Eigen::SparseMatrix<double> homogenize(const QuadraticForm& f);

ShorSDP shor_relax(const QCQP& q);

/// SDPA sparse format (.dat-s). Block 1 is the psd X; block 2 is a diagonal block
/// holding one nonnegative slack per inequality.
void export_sdpa(const ShorSDP& sdp, std::ostream& out);

} // namespace lipopt
