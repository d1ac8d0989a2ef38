#include "lipopt/sdp.hpp"

#include "lipopt/errors.hpp"
#include "lipopt/format.hpp"

#include <ostream>

namespace lipopt {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

double QuadraticForm::operator()(const Eigen::VectorXd& z) const
{
    return z.dot(quadratic * z) + linear.dot(z) + constant;
}

Eigen::Index QCQP::dim() const
{
    Eigen::Index n = 1;
    for (auto b : block_sizes)
        n += b;
    return n;
}

namespace {

QuadraticForm make_form(Eigen::Index n, const std::vector<Trip>& quad, Eigen::VectorXd linear, double constant)
{
    QuadraticForm f;
    f.quadratic.resize(n, n);
    f.quadratic.setFromTriplets(quad.begin(), quad.end()); // duplicates are summed
    f.quadratic.makeCompressed();
    f.linear = std::move(linear);
    f.constant = constant;
    return f;
}

/// Adds coefficient c on z_a z_b split symmetrically.
void add_product(std::vector<Trip>& quad, Eigen::Index a, Eigen::Index b, double c)
{
    if (a == b) {
        quad.emplace_back(a, a, c);
    } else {
        quad.emplace_back(a, b, 0.5 * c);
        quad.emplace_back(b, a, 0.5 * c);
    }
}

} // namespace

QCQP qcqp_reformulate(const Network& net)
{
    const Index d = net.depth();
    if (d != 2 && d != 3)
        throw DomainError("QCQP reformulation supports depth 2 and 3, got " + std::to_string(d));

    QCQP q;
    q.block_sizes.push_back(net.input_dim());
    for (Index i = 0; i + 1 < d; ++i)
        q.block_sizes.push_back(net.layer(i).rows());
    const Index n0 = q.block_sizes[0];
    const Index n1 = q.block_sizes[1];
    const Index off1 = n0;
    if (d == 3)
        q.block_sizes.push_back(n1 * q.block_sizes[2]);
    const Index nz = q.dim() - 1;

    std::vector<Trip> quad;
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(nz);
    const auto& W1 = net.layer(0).matrix();

    if (d == 2) {
        // 1/2 sum_{j,k} W1[k,j] W2[k] s0_j (s1_k + 1)
        const Eigen::RowVectorXd w2 = Eigen::RowVectorXd(net.layer(1).matrix().row(0));
        for (Index k = 0; k < W1.outerSize(); ++k)
            for (WeightMatrix::Storage::InnerIterator it(W1, k); it; ++it) {
                const double c = 0.5 * it.value() * w2[k];
                if (c == 0.0)
                    continue;
                add_product(quad, it.col(), off1 + k, c);
                lin[it.col()] += c;
            }
    } else {
        // 1/4 sum_{j,k,l} W1[k,j] W2[l,k] W3[l] s0_j (s1_k s2_l + s1_k + s2_l + 1)
        const Index n2 = q.block_sizes[2];
        const Index off2 = n0 + n1;
        const Index off12 = off2 + n2;
        const auto& W2 = net.layer(1).matrix();
        const Eigen::RowVectorXd w3 = Eigen::RowVectorXd(net.layer(2).matrix().row(0));
        for (Index l = 0; l < W2.outerSize(); ++l) {
            if (w3[l] == 0.0)
                continue;
            for (WeightMatrix::Storage::InnerIterator kt(W2, l); kt; ++kt) {
                const Index k = kt.col();
                for (WeightMatrix::Storage::InnerIterator jt(W1, k); jt; ++jt) {
                    const Index j = jt.col();
                    const double c = 0.25 * jt.value() * kt.value() * w3[l];
                    add_product(quad, j, off12 + k * n2 + l, c);
                    add_product(quad, j, off1 + k, c);
                    add_product(quad, j, off2 + l, c);
                    lin[j] += c;
                }
            }
        }
    }
    q.objective = make_form(nz, quad, lin, 0.0);

    // boxes (s_v - 1)(s_v + 1) <= 0 on every s variable
    const Index svars = d == 2 ? nz : nz - q.block_sizes[3];
    for (Index v = 0; v < svars; ++v)
        q.constraints.push_back(make_form(nz, {Trip(v, v, 1.0)}, Eigen::VectorXd::Zero(nz), -1.0));
    q.box_count = static_cast<std::size_t>(svars);

    if (d == 3) {
        const Index n2 = q.block_sizes[2];
        const Index off2 = n0 + n1;
        const Index off12 = off2 + n2;
        for (Index k = 0; k < n1; ++k)
            for (Index l = 0; l < n2; ++l) {
                const Index zi = off12 + k * n2 + l;
                std::vector<Trip> prod;
                add_product(prod, off1 + k, off2 + l, 1.0);
                Eigen::VectorXd e = Eigen::VectorXd::Zero(nz);
                e[zi] = 1.0;
                // z - s1 s2 <= 0 and s1 s2 - z <= 0
                std::vector<Trip> neg;
                for (const auto& t : prod)
                    neg.emplace_back(t.row(), t.col(), -t.value());
                q.constraints.push_back(make_form(nz, neg, e, 0.0));
                q.constraints.push_back(make_form(nz, prod, -e, 0.0));
                ++q.lifting_count;
            }
    }
    return q;
}

Eigen::VectorXd lift_point(const QCQP& q, const Eigen::VectorXd& s)
{
    Eigen::Index svars = 0;
    for (std::size_t b = 0; b < q.block_sizes.size() && b < 3; ++b)
        svars += q.block_sizes[b];
    if (s.size() != svars)
        throw DimensionError("point has wrong length for the QCQP");
    Eigen::VectorXd z(q.dim() - 1);
    z.head(svars) = s;
    if (q.block_sizes.size() == 4) {
        const Index n1 = q.block_sizes[1];
        const Index n2 = q.block_sizes[2];
        const Index off1 = q.block_sizes[0];
        const Index off2 = off1 + n1;
        for (Index k = 0; k < n1; ++k)
            for (Index l = 0; l < n2; ++l)
                z[svars + k * n2 + l] = s[off1 + k] * s[off2 + l];
    }
    return z;
}

SpMat homogenize(const QuadraticForm& f)
{
    const Index nz = f.quadratic.rows();
    std::vector<Trip> trip;
    if (f.constant != 0.0)
        trip.emplace_back(0, 0, f.constant);
    for (Index v = 0; v < nz; ++v)
        if (f.linear[v] != 0.0) {
            trip.emplace_back(0, v + 1, 0.5 * f.linear[v]);
            trip.emplace_back(v + 1, 0, 0.5 * f.linear[v]);
        }
    for (Index c = 0; c < f.quadratic.outerSize(); ++c)
        for (SpMat::InnerIterator it(f.quadratic, c); it; ++it)
            if (it.value() != 0.0)
                trip.emplace_back(it.row() + 1, it.col() + 1, it.value());
    SpMat out(nz + 1, nz + 1);
    out.setFromTriplets(trip.begin(), trip.end());
    out.prune(0.0);
    out.makeCompressed();
    return out;
}

ShorSDP shor_relax(const QCQP& q)
{
    ShorSDP sdp;
    sdp.dim = q.dim();
    sdp.objective = homogenize(q.objective);
    for (const auto& c : q.constraints)
        sdp.inequalities.push_back(homogenize(c));
    return sdp;
}

namespace {

void write_upper(std::ostream& out, std::size_t matno, int block, const SpMat& m)
{
    // row-major walk of the upper triangle for a deterministic order
    Eigen::SparseMatrix<double, Eigen::RowMajor> r = m;
    for (Index i = 0; i < r.outerSize(); ++i)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(r, i); it; ++it)
            if (it.col() >= i && it.value() != 0.0)
                out << matno << ' ' << block << ' ' << i + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value())
                    << '\n';
}

} // namespace

void export_sdpa(const ShorSDP& sdp, std::ostream& out)
{
    const std::size_t m = sdp.constraint_count();
    const std::size_t slacks = sdp.inequalities.size();
    out << "\"Shor relaxation of the normalized norm-gradient QCQP.\n";
    out << "* SDPA dual form: maximize F0 . Y subject to Fi . Y = ci, Y psd.\n";
    out << "* Block 1 is X (X[1,1] = 1 is the last constraint); block 2 is diagonal and\n";
    out << "* holds one slack per inequality <A_i, X> <= 0. The optimal value of the\n";
    out << "* maximization is the Lipschitz bound.\n";
    out << m << '\n';
    out << (slacks > 0 ? 2 : 1) << '\n';
    out << sdp.dim;
    if (slacks > 0)
        out << ' ' << -static_cast<long long>(slacks);
    out << '\n';
    for (std::size_t i = 0; i < m; ++i)
        out << (i ? " " : "") << (i + 1 == m ? 1 : 0);
    out << '\n';
    write_upper(out, 0, 1, sdp.objective);
    for (std::size_t i = 0; i < slacks; ++i) {
        write_upper(out, i + 1, 1, sdp.inequalities[i]);
        out << i + 1 << " 2 " << i + 1 << ' ' << i + 1 << " 1\n";
    }
    out << m << " 1 1 1 1\n";
    if (!out)
        throw Error("failed writing SDPA output");
}

} // namespace lipopt
