#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lipopt {

/// min cost^T x  s.t.  A x = b,  x_j >= 0 unless free[j].
struct LinearProgram {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    Eigen::VectorXd cost;
    std::vector<bool> free;

    Eigen::Index rows() const { return A.rows(); }
    Eigen::Index cols() const { return A.cols(); }
};

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string_view to_string(LPStatus status);

struct SimplexOptions {
    long max_pivots = 1'000'000;
    int refactor_interval = 100;
    double pivot_tolerance = 1e-9;
    double feasibility_tolerance = 1e-8;
    double optimality_tolerance = 1e-9;
    /// Keep the phase 2 objective after every pivot in LPSolution::objective_trace.
    bool record_trace = false;
};

struct LPSolution {
    LPStatus status = LPStatus::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;
    long iterations = 0;
    long phase1_iterations = 0;
    /// FNV-1a hash of the (entering, leaving) pivot sequence.
    std::uint64_t pivot_signature = 0;
    /// ||A x - b||_inf of the returned point.
    double residual = 0.0;
    std::vector<double> objective_trace;
};

/// Two-phase revised simplex with Bland's rule. The basis is held as a sparse LU
/// factorization plus product-form updates, refactorized every refactor_interval pivots.
/// Free columns are split into a difference of two nonnegative columns.
LPSolution solve(const LinearProgram& lp, const SimplexOptions& options = {});

/// Free-format MPS. Objective row COST, constraint rows R0000001..., columns named by
/// `column_names` (default C0000001...), free columns marked FR, values with 17
/// significant digits.
void write_mps(const LinearProgram& lp, std::ostream& out, std::span<const std::string> column_names = {},
               std::string_view name = "LIPOPT");

std::string numbered_name(char prefix, std::size_t index);

} // namespace lipopt
