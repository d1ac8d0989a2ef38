#include "lipopt/lp.hpp"

#include "lipopt/errors.hpp"
#include "lipopt/format.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace lipopt {

std::string_view to_string(LPStatus status)
{
    switch (status) {
    case LPStatus::Optimal:
        return "optimal";
    case LPStatus::Infeasible:
        return "infeasible";
    case LPStatus::Unbounded:
        return "unbounded";
    case LPStatus::IterationLimit:
        return "iteration_limit";
    }
    return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Eigen::Index;
using Eigen::VectorXd;

/// B^{-1} as LU(B_0) followed by eta matrices E_1..E_k with B = B_0 E_1 ... E_k.
class BasisFactor {
  public:
    void factorize(const SpMat& basis)
    {
        etas_.clear();
        m_ = basis.rows();
        if (m_ == 0)
            return;
        lu_.analyzePattern(basis);
        lu_.factorize(basis);
        if (lu_.info() != Eigen::Success)
            throw Error("simplex basis factorization failed: " + lu_.lastErrorMessage());
    }

    VectorXd ftran(const VectorXd& a) const
    {
        if (m_ == 0)
            return a;
        VectorXd x = lu_.solve(a);
        for (const auto& eta : etas_) {
            const double xr = x[eta.row] / eta.d[eta.row];
            x -= xr * eta.d;
            x[eta.row] = xr;
        }
        return x;
    }

    VectorXd btran(const VectorXd& c) const
    {
        if (m_ == 0)
            return c;
        VectorXd v = c;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            const double dr = it->d[it->row];
            const double dot = it->d.dot(v) - dr * v[it->row];
            v[it->row] = (v[it->row] - dot) / dr;
        }
        return lu_.transpose().solve(v);
    }

    void push(Index row, VectorXd d) { etas_.push_back({row, std::move(d)}); }
    std::size_t eta_count() const { return etas_.size(); }

  private:
    struct Eta {
        Index row;
        VectorXd d;
    };
    Index m_ = 0;
    mutable Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_; // transpose() is non-const
    std::vector<Eta> etas_;
};

class Simplex {
  public:
    Simplex(const LinearProgram& lp, const SimplexOptions& options)
        : lp_(lp)
        , opt_(options)
    {
    }

    LPSolution run();

  private:
    enum class Outcome { Optimal, Unbounded, IterationLimit };

    void build_standard_form();
    double column_dot(Index j, const VectorXd& y) const;
    VectorXd column(Index j) const;
    void refactor();
    Outcome iterate(const VectorXd& cost, bool phase_one);
    void pivot(Index q, Index r, VectorXd d, double theta);
    void drive_out_artificials();
    double objective(const VectorXd& cost) const;

    const LinearProgram& lp_;
    SimplexOptions opt_;
    LPSolution sol_;

    // standard form: A_ x = b_, x >= 0; columns [0, n_) structural, [n_, n_ + m_) artificial
    SpMat A_;
    VectorXd b_;
    VectorXd cost_;
    std::vector<Index> origin_;   // structural column -> LP column
    std::vector<double> sign_;    // +1, or -1 for the negative half of a free column
    std::vector<Index> row_of_;   // standard row -> LP row
    Index m_ = 0;
    Index n_ = 0;

    std::vector<Index> basis_;
    std::vector<Index> position_; // column -> basis position or -1
    VectorXd xb_;
    BasisFactor factor_;
    bool infeasible_rows_ = false;
};

void Simplex::build_standard_form()
{
    const SpMat A = lp_.A;
    // empty rows are dropped; one with a nonzero rhs makes the problem infeasible
    std::vector<char> nonempty(static_cast<std::size_t>(A.rows()), 0);
    for (Index j = 0; j < A.outerSize(); ++j)
        for (SpMat::InnerIterator it(A, j); it; ++it)
            if (it.value() != 0.0)
                nonempty[static_cast<std::size_t>(it.row())] = 1;
    std::vector<Index> new_row(static_cast<std::size_t>(A.rows()), -1);
    for (Index i = 0; i < A.rows(); ++i) {
        if (nonempty[static_cast<std::size_t>(i)]) {
            new_row[static_cast<std::size_t>(i)] = static_cast<Index>(row_of_.size());
            row_of_.push_back(i);
        } else if (std::abs(lp_.b[i]) > opt_.feasibility_tolerance) {
            infeasible_rows_ = true;
        }
    }
    m_ = static_cast<Index>(row_of_.size());
    b_.resize(m_);
    std::vector<double> flip(static_cast<std::size_t>(m_), 1.0);
    for (Index r = 0; r < m_; ++r) {
        const double v = lp_.b[row_of_[static_cast<std::size_t>(r)]];
        flip[static_cast<std::size_t>(r)] = v < 0.0 ? -1.0 : 1.0;
        b_[r] = std::abs(v);
    }

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> costs;
    for (Index j = 0; j < A.cols(); ++j) {
        const bool is_free = static_cast<std::size_t>(j) < lp_.free.size() && lp_.free[static_cast<std::size_t>(j)];
        for (double s : {1.0, -1.0}) {
            if (s < 0.0 && !is_free)
                break;
            const Index col = static_cast<Index>(origin_.size());
            for (SpMat::InnerIterator it(A, j); it; ++it) {
                const Index r = new_row[static_cast<std::size_t>(it.row())];
                if (r >= 0 && it.value() != 0.0)
                    trip.emplace_back(r, col, s * flip[static_cast<std::size_t>(r)] * it.value());
            }
            origin_.push_back(j);
            sign_.push_back(s);
            costs.push_back(s * lp_.cost[j]);
        }
    }
    n_ = static_cast<Index>(origin_.size());
    A_.resize(m_, n_);
    A_.setFromTriplets(trip.begin(), trip.end());
    A_.makeCompressed();
    cost_ = Eigen::Map<VectorXd>(costs.data(), static_cast<Index>(costs.size()));
}

double Simplex::column_dot(Index j, const VectorXd& y) const
{
    if (j >= n_)
        return y[j - n_];
    double s = 0.0;
    for (SpMat::InnerIterator it(A_, j); it; ++it)
        s += it.value() * y[it.row()];
    return s;
}

VectorXd Simplex::column(Index j) const
{
    VectorXd a = VectorXd::Zero(m_);
    if (j >= n_)
        a[j - n_] = 1.0;
    else
        for (SpMat::InnerIterator it(A_, j); it; ++it)
            a[it.row()] = it.value();
    return a;
}

void Simplex::refactor()
{
    std::vector<Eigen::Triplet<double>> trip;
    for (Index p = 0; p < m_; ++p) {
        const Index j = basis_[static_cast<std::size_t>(p)];
        if (j >= n_)
            trip.emplace_back(j - n_, p, 1.0);
        else
            for (SpMat::InnerIterator it(A_, j); it; ++it)
                trip.emplace_back(it.row(), p, it.value());
    }
    SpMat B(m_, m_);
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    factor_.factorize(B);
    xb_ = factor_.ftran(b_);
    for (Index p = 0; p < m_; ++p)
        if (xb_[p] < 0.0 && xb_[p] > -opt_.feasibility_tolerance)
            xb_[p] = 0.0;
}

double Simplex::objective(const VectorXd& cost) const
{
    double s = 0.0;
    for (Index p = 0; p < m_; ++p)
        s += cost[basis_[static_cast<std::size_t>(p)]] * xb_[p];
    return s;
}

void Simplex::pivot(Index q, Index r, VectorXd d, double theta)
{
    xb_ -= theta * d;
    xb_[r] = theta;
    const Index leaving = basis_[static_cast<std::size_t>(r)];
    position_[static_cast<std::size_t>(leaving)] = -1;
    basis_[static_cast<std::size_t>(r)] = q;
    position_[static_cast<std::size_t>(q)] = r;

    for (auto v : {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(leaving)}) {
        sol_.pivot_signature ^= v;
        sol_.pivot_signature *= 1099511628211ULL;
    }
    ++sol_.iterations;

    factor_.push(r, std::move(d));
    if (static_cast<int>(factor_.eta_count()) >= opt_.refactor_interval)
        refactor();
}

Simplex::Outcome Simplex::iterate(const VectorXd& cost, bool phase_one)
{
    VectorXd cb(m_);
    for (;;) {
        if (sol_.iterations >= opt_.max_pivots)
            return Outcome::IterationLimit;
        for (Index p = 0; p < m_; ++p)
            cb[p] = cost[basis_[static_cast<std::size_t>(p)]];
        const VectorXd y = factor_.btran(cb);

        // Bland: lowest-index improving column; artificial columns never enter
        Index q = -1;
        for (Index j = 0; j < n_; ++j) {
            if (position_[static_cast<std::size_t>(j)] >= 0)
                continue;
            if (cost[j] - column_dot(j, y) < -opt_.optimality_tolerance) {
                q = j;
                break;
            }
        }
        if (q < 0)
            return Outcome::Optimal;

        VectorXd d = factor_.ftran(column(q));
        Index r = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Index p = 0; p < m_; ++p) {
            const Index bj = basis_[static_cast<std::size_t>(p)];
            double ratio;
            if (!phase_one && bj >= n_) {
                // artificials are pinned at zero after phase one
                if (std::abs(d[p]) <= opt_.pivot_tolerance)
                    continue;
                ratio = 0.0;
            } else {
                if (d[p] <= opt_.pivot_tolerance)
                    continue;
                ratio = std::max(xb_[p], 0.0) / d[p];
            }
            if (r < 0 || ratio < best - 1e-12) {
                best = ratio;
                r = p;
            } else if (ratio <= best + 1e-12 && bj < basis_[static_cast<std::size_t>(r)]) {
                best = ratio; // Bland tie-break on the smallest basic index
                r = p;
            }
        }
        if (r < 0)
            return Outcome::Unbounded;

        pivot(q, r, std::move(d), best);
        if (!phase_one && opt_.record_trace)
            sol_.objective_trace.push_back(objective(cost));
    }
}

void Simplex::drive_out_artificials()
{
    for (Index p = 0; p < m_; ++p) {
        if (basis_[static_cast<std::size_t>(p)] < n_)
            continue;
        VectorXd e = VectorXd::Zero(m_);
        e[p] = 1.0;
        const VectorXd rho = factor_.btran(e);
        Index best = -1;
        double best_abs = 1e-7;
        for (Index j = 0; j < n_; ++j) {
            if (position_[static_cast<std::size_t>(j)] >= 0)
                continue;
            const double a = std::abs(column_dot(j, rho));
            if (a > best_abs) {
                best_abs = a;
                best = j;
            }
        }
        if (best < 0)
            continue; // redundant row: the artificial stays basic at zero
        VectorXd d = factor_.ftran(column(best));
        const double theta = xb_[p] / d[p];
        pivot(best, p, std::move(d), theta);
    }
}

LPSolution Simplex::run()
{
    sol_.pivot_signature = 1469598103934665603ULL;
    if (lp_.b.size() != lp_.A.rows() || lp_.cost.size() != lp_.A.cols())
        throw DimensionError("linear program has inconsistent dimensions");
    build_standard_form();
    if (infeasible_rows_) {
        sol_.status = LPStatus::Infeasible;
        return sol_;
    }

    basis_.resize(static_cast<std::size_t>(m_));
    position_.assign(static_cast<std::size_t>(n_ + m_), -1);
    for (Index p = 0; p < m_; ++p) {
        basis_[static_cast<std::size_t>(p)] = n_ + p;
        position_[static_cast<std::size_t>(n_ + p)] = p;
    }
    refactor();

    VectorXd phase1_cost = VectorXd::Zero(n_ + m_);
    phase1_cost.tail(m_).setOnes();
    auto outcome = iterate(phase1_cost, true);
    sol_.phase1_iterations = sol_.iterations;
    if (outcome == Outcome::IterationLimit) {
        sol_.status = LPStatus::IterationLimit;
        return sol_;
    }
    refactor();
    if (objective(phase1_cost) > opt_.feasibility_tolerance * (1.0 + b_.lpNorm<Eigen::Infinity>())) {
        sol_.status = LPStatus::Infeasible;
        return sol_;
    }
    drive_out_artificials();

    VectorXd phase2_cost = VectorXd::Zero(n_ + m_);
    phase2_cost.head(n_) = cost_;
    outcome = iterate(phase2_cost, false);
    if (outcome == Outcome::IterationLimit) {
        sol_.status = LPStatus::IterationLimit;
        return sol_;
    }
    if (outcome == Outcome::Unbounded) {
        sol_.status = LPStatus::Unbounded;
        return sol_;
    }
    refactor();

    sol_.x = VectorXd::Zero(lp_.A.cols());
    for (Index p = 0; p < m_; ++p) {
        const Index j = basis_[static_cast<std::size_t>(p)];
        if (j < n_)
            sol_.x[origin_[static_cast<std::size_t>(j)]] += sign_[static_cast<std::size_t>(j)] * std::max(xb_[p], 0.0);
    }
    sol_.objective = lp_.cost.dot(sol_.x);
    sol_.residual = lp_.A.rows() == 0 ? 0.0 : (lp_.A * sol_.x - lp_.b).lpNorm<Eigen::Infinity>();
    sol_.status = LPStatus::Optimal;
    return sol_;
}

} // namespace

LPSolution solve(const LinearProgram& lp, const SimplexOptions& options)
{
    return Simplex(lp, options).run();
}

std::string numbered_name(char prefix, std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%07zu", prefix, index);
    return buf;
}

void write_mps(const LinearProgram& lp, std::ostream& out, std::span<const std::string> column_names,
               std::string_view name)
{
    const Index m = lp.A.rows();
    const Index n = lp.A.cols();
    if (!column_names.empty() && static_cast<Index>(column_names.size()) != n)
        throw DimensionError("column name count does not match the LP");
    auto col_name = [&](Index j) {
        return column_names.empty() ? numbered_name('C', static_cast<std::size_t>(j + 1))
                                    : column_names[static_cast<std::size_t>(j)];
    };
    SpMat A = lp.A;
    A.makeCompressed();

    out << "NAME " << name << '\n';
    out << "ROWS\n N COST\n";
    for (Index i = 0; i < m; ++i)
        out << " E " << numbered_name('R', static_cast<std::size_t>(i + 1)) << '\n';
    out << "COLUMNS\n";
    for (Index j = 0; j < n; ++j) {
        const auto cname = col_name(j);
        bool wrote = false;
        if (lp.cost[j] != 0.0) {
            out << ' ' << cname << " COST " << format_double(lp.cost[j]) << '\n';
            wrote = true;
        }
        for (SpMat::InnerIterator it(A, j); it; ++it) {
            if (it.value() == 0.0)
                continue;
            out << ' ' << cname << ' ' << numbered_name('R', static_cast<std::size_t>(it.row() + 1)) << ' '
                << format_double(it.value()) << '\n';
            wrote = true;
        }
        if (!wrote)
            out << ' ' << cname << " COST 0\n";
    }
    out << "RHS\n";
    for (Index i = 0; i < m; ++i)
        if (lp.b[i] != 0.0)
            out << " RHS " << numbered_name('R', static_cast<std::size_t>(i + 1)) << ' ' << format_double(lp.b[i])
                << '\n';
    out << "BOUNDS\n";
    for (Index j = 0; j < n; ++j)
        if (static_cast<std::size_t>(j) < lp.free.size() && lp.free[static_cast<std::size_t>(j)])
            out << " FR BND " << col_name(j) << '\n';
    out << "ENDATA\n";
    if (!out)
        throw Error("failed writing MPS output");
}

} // namespace lipopt
