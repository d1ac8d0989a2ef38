// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "lipopt/certificate.hpp"
#include "lipopt/errors.hpp"
#include "lipopt/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace lipopt;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Outcome {
    enum class Kind { Pass, Fail, Skip } kind = Kind::Pass;
    std::string detail;
};

struct Check {
    bool ok = true;
    std::ostringstream first_failure;

    void expect(bool cond, const std::string& what)
    {
        if (!cond && ok) {
            ok = false;
            first_failure << what;
        }
    }
};

Outcome finish(const Check& c, const std::string& summary)
{
    if (c.ok)
        return {Outcome::Kind::Pass, summary};
    return {Outcome::Kind::Fail, summary + "; first failure: " + c.first_failure.str()};
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

struct Instance {
    std::vector<Index> widths;
    Index r = 0; // 0 = fully connected
    std::uint64_t seed = 0;
    Network net;
    std::string name() const
    {
        std::string s;
        for (std::size_t i = 0; i < widths.size(); ++i)
            s += (i ? "x" : "") + std::to_string(widths[i]);
        return s + (r ? " r=" + std::to_string(r) : " full") + " seed=" + std::to_string(seed);
    }
};

std::vector<Instance> sandwich_instances()
{
    std::vector<Instance> out;
    for (auto widths : {std::vector<Index>{5, 5, 1}, std::vector<Index>{8, 8, 1}, std::vector<Index>{4, 4, 4, 1}})
        for (Index r : {Index{2}, Index{0}})
            for (std::uint64_t seed = 1; seed <= 5; ++seed)
                out.push_back({widths, r, seed, random_network(widths, r, seed)});
    return out;
}

// shared results for criteria 3, 4, 5 and 6
struct SolveRecord {
    std::string what;
    double theta = 0.0;
    LPStatus status = LPStatus::Infeasible;
    double residual = 0.0;
};
std::vector<SolveRecord> g_solves;

BoundReport bound(const Network& net, unsigned k, BoundMode mode, const std::string& what, bool prune = true,
                  std::optional<NeuronBounds> nb = std::nullopt)
{
    BoundOptions o;
    o.k = k;
    o.mode = mode;
    o.prune = prune;
    o.bounds = std::move(nb);
    const auto r = lipopt_bound(net, o);
    g_solves.push_back({what, r.theta, r.status, r.residual});
    return r;
}

struct SandwichData {
    Instance inst;
    double lbs = 0.0;
    double vmax = 0.0;
    double theta_d = 0.0;
    double theta_d1 = 0.0;
    unsigned d = 0;
};
std::vector<SandwichData> g_sandwich;

// ---------------------------------------------------------------------------

Outcome criterion1()
{
    const auto t = std::chrono::steady_clock::now();
    Check c;
    const auto k2 = krivine_term_count(884, 2);
    const auto k3 = krivine_term_count(884, 3);
    c.expect(k2 == 1'565'565, "k=2 count " + std::to_string(k2));
    c.expect(k3 == 924'205'205, "k=3 count " + std::to_string(k3));
    c.expect(count_distinct_terms(dense_pattern(884), 2) == 1'565'565, "support-based count at k=2");
    const double s = seconds_since(t);
    c.expect(s < 1.0, "runtime " + fmt(s) + " s");
    return finish(c, "C(1770,2)=" + std::to_string(k2) + ", C(1771,3)=" + std::to_string(k3) + ", " + fmt(s) + " s");
}

Outcome criterion2()
{
    const auto t = std::chrono::steady_clock::now();
    Check c;
    std::vector<WeightMatrix> layers;
    layers.emplace_back(MatrixXd::Ones(1, 1));
    layers.emplace_back(MatrixXd::Ones(1, 1));
    const Network net(std::move(layers), Activation::Elu);
    const auto r = bound(net, 2, BoundMode::Sparse, "1-1-1 k=2");
    const auto v = vertex_max(norm_gradient_polynomial(net));
    const double l = lbs(net);
    c.expect(r.status == LPStatus::Optimal && std::abs(r.theta - 1.0) <= 1e-6, "theta_2 = " + fmt(r.theta));
    c.expect(v.value == 1.0, "vertex max = " + fmt(v.value));
    c.expect(l <= 1.0 + 1e-9, "lbs = " + fmt(l));
    const double s = seconds_since(t);
    c.expect(s < 1.0, "runtime " + fmt(s) + " s");
    return finish(c, "theta_2=" + fmt(r.theta) + ", oracle=" + fmt(v.value) + ", lbs=" + fmt(l) + ", " + fmt(s) + " s");
}

Outcome criterion3()
{
    const auto t = std::chrono::steady_clock::now();
    Check c;
    for (auto& inst : sandwich_instances()) {
        SandwichData d{std::move(inst)};
        d.d = static_cast<unsigned>(d.inst.net.depth());
        d.lbs = lbs(d.inst.net, {50000, 1.0, d.inst.seed});
        d.vmax = vertex_max(norm_gradient_polynomial(d.inst.net)).value;
        const auto a = bound(d.inst.net, d.d, BoundMode::Sparse, d.inst.name() + " k=d");
        const auto b = bound(d.inst.net, d.d + 1, BoundMode::Sparse, d.inst.name() + " k=d+1");
        d.theta_d = a.theta;
        d.theta_d1 = b.theta;
        c.expect(d.lbs <= d.vmax + 1e-7, d.inst.name() + ": lbs " + fmt(d.lbs) + " > oracle " + fmt(d.vmax));
        c.expect(d.vmax <= a.theta + 1e-7, d.inst.name() + ": oracle " + fmt(d.vmax) + " > theta_d " + fmt(a.theta));
        c.expect(d.vmax <= b.theta + 1e-7, d.inst.name() + ": oracle " + fmt(d.vmax) + " > theta_d+1 " + fmt(b.theta));
        g_sandwich.push_back(std::move(d));
    }
    const double s = seconds_since(t);
    c.expect(s < 600.0, "runtime " + fmt(s) + " s");
    return finish(c, std::to_string(g_sandwich.size()) + " nets, k in {d, d+1}, " + fmt(s) + " s");
}

Outcome criterion4()
{
    Check c;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& d : g_sandwich) {
        worst = std::max(worst, d.theta_d1 - d.theta_d);
        c.expect(d.theta_d1 <= d.theta_d + 1e-9,
                 d.inst.name() + ": theta_d+1 " + fmt(d.theta_d1) + " > theta_d " + fmt(d.theta_d));
    }
    c.expect(g_sandwich.size() == 30, "expected 30 nets from criterion 3");
    return finish(c, std::to_string(g_sandwich.size()) + " nets, max(theta_{k+1} - theta_k) = " + fmt(worst));
}

Outcome criterion5()
{
    Check c;
    int cells = 0;
    for (const auto& d : g_sandwich) {
        if (d.inst.r == 0)
            continue;
        const Network& net = d.inst.net;
        const VariableIndexing idx(net);
        for (unsigned k : {d.d, d.d + 1}) {
            const auto sparse_terms = enumerate_terms(induced_pattern(computational_graph(net), idx), k);
            const auto dense_terms = enumerate_terms(dense_pattern(idx.total()), k);
            const std::set<CertificateTerm> dense_set(dense_terms.begin(), dense_terms.end());
            const bool subset = std::all_of(sparse_terms.begin(), sparse_terms.end(),
                                            [&](const CertificateTerm& t) { return dense_set.count(t) > 0; });
            c.expect(subset, d.inst.name() + " k=" + std::to_string(k) + ": sparse term outside the dense set");
            const double ts = k == d.d ? d.theta_d : d.theta_d1;
            const auto dense = bound(net, k, BoundMode::Dense, d.inst.name() + " dense k=" + std::to_string(k));
            c.expect(ts >= dense.theta - 1e-9, d.inst.name() + " k=" + std::to_string(k) + ": sparse " + fmt(ts) +
                                                   " < dense " + fmt(dense.theta));
            ++cells;
        }
    }
    return finish(c, std::to_string(cells) + " sparse instances (k in {d, d+1})");
}

Outcome criterion6()
{
    Check c;
    double worst = 0.0;
    int solved = 0;
    for (const auto& s : g_solves) {
        if (s.status != LPStatus::Optimal)
            continue;
        ++solved;
        worst = std::max(worst, s.residual);
        c.expect(s.residual <= 1e-6, s.what + ": residual " + fmt(s.residual));
    }
    return finish(c, std::to_string(solved) + " solved LPs so far, max residual " + fmt(worst));
}

Polynomial random_sparse_quadratic(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1, 1);
    Polynomial p(n);
    p.add_term(Monomial{}, u(rng));
    for (Var i = 0; i < n; ++i) {
        if (rng() % 2)
            p.add_term(Monomial::variable(i), u(rng));
        for (Var j = i; j < n; ++j)
            if (rng() % 4 == 0)
                p.add_term(Monomial({{i, 1}, {j, 1}}), u(rng));
    }
    return p;
}

Outcome criterion7()
{
    Check c;
    double worst = 0.0;
    std::mt19937_64 rng(77);
    std::size_t removed = 0;
    for (int t = 0; t < 10; ++t) {
        const Polynomial p = random_sparse_quadratic(6, rng);
        const auto all = enumerate_terms(dense_pattern(6), 2);
        auto pr = prune_degree2_terms(p, all);
        removed += pr.removed;
        const auto full = solve(assemble_lp(p, all));
        const auto cut = solve(assemble_lp(p, std::move(pr.terms)));
        c.expect(full.status == LPStatus::Optimal && cut.status == LPStatus::Optimal, "quadratic LP not optimal");
        worst = std::max(worst, std::abs(full.objective - cut.objective));
        c.expect(std::abs(full.objective - cut.objective) <= 1e-6,
                 "quadratic " + std::to_string(t) + ": " + fmt(full.objective) + " vs " + fmt(cut.objective));
    }
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Network net = random_network(std::vector<Index>{6, 5, 1}, seed % 2 ? 3 : 0, seed);
        for (auto mode : {BoundMode::Sparse, BoundMode::Dense}) {
            const auto a = bound(net, 2, mode, "prune check", true);
            const auto b = bound(net, 2, mode, "no-prune check", false);
            worst = std::max(worst, std::abs(a.theta - b.theta));
            c.expect(a.terms < b.terms, "pruning removed nothing on a net");
            c.expect(std::abs(a.theta - b.theta) <= 1e-6, "net seed " + std::to_string(seed) + ": " + fmt(a.theta) +
                                                               " vs " + fmt(b.theta));
        }
    }
    return finish(c, "10 quadratics + 5 nets (sparse and dense), max |diff| " + fmt(worst) + ", " +
                         std::to_string(removed) + " terms pruned on the quadratics");
}

Outcome criterion8()
{
    Check c;
    double worst = 0.0;
    const std::vector<std::vector<Index>> archs{{5, 5, 1}, {4, 6, 3, 1}, {3, 4, 4, 2, 1}, {10, 8, 1}, {6, 6, 6, 1}};
    int nets = 0;
    for (std::size_t a = 0; a < archs.size(); ++a)
        for (auto act : {Activation::Elu, Activation::Softplus}) {
            const Network net = random_network(archs[a], 0, 100 + a, act);
            ++nets;
            for (Index i = 0; i < 100; ++i) {
                const VectorXd x = lbs_sample(net.input_dim(), 1.0, 500 + a, i);
                const VectorXd g = gradient(net, x);
                const VectorXd fd = finite_diff_gradient(net, x, 1e-5);
                const double rel = (g - fd).norm() / std::max(g.norm(), 1e-300);
                worst = std::max(worst, rel);
                c.expect(rel < 1e-5, "relative error " + fmt(rel));
            }
        }
    return finish(c, std::to_string(nets) + " nets x 100 points, max relative error " + fmt(worst));
}

Outcome criterion9()
{
    Check c;
    int cells = 0;
    int gap = 0;
    std::ostringstream log;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    const std::vector<std::vector<Index>> archs{{4, 4, 1}, {5, 4, 1}, {3, 3, 3, 1}, {4, 3, 1}, {3, 4, 2, 1}};
    for (std::size_t n = 0; n < archs.size(); ++n) {
        const Network net = random_network(archs[n], 0, 40 + n);
        const Polynomial p = norm_gradient_polynomial(net);
        const auto global = vertex_max(p);
        const unsigned k = static_cast<unsigned>(net.depth());
        const auto gtheta = bound(net, k, BoundMode::Sparse, "global for local");
        VectorXd x0(net.input_dim());
        for (Index j = 0; j < x0.size(); ++j)
            x0[j] = u(rng);
        for (double eps : {0.05, 0.1, 0.5}) {
            const auto pre = preactivation_bounds(net, x0, eps);
            const auto nb = derivative_bounds(net, pre);
            // containment on samples of the ball
            for (int s = 0; s < 1000; ++s) {
                VectorXd x = x0;
                for (Index j = 0; j < x.size(); ++j)
                    x[j] += eps * u(rng);
                const auto f = forward(net, x);
                for (std::size_t i = 0; i < pre.size(); ++i) {
                    const bool in = ((f.preactivations[i] - pre[i].lower).array() >= -1e-12).all() &&
                                    ((pre[i].upper - f.preactivations[i]).array() >= -1e-12).all();
                    c.expect(in, "preactivation outside its interval");
                    const VectorXd dv = f.preactivations[i].unaryExpr(
                        [&](double z) { return activation_derivative(net.activation(), z); });
                    const bool din = ((dv - nb.lower[i]).array() >= -1e-12).all() &&
                                     ((nb.upper[i] - dv).array() >= -1e-12).all();
                    c.expect(din, "derivative outside its bounds");
                }
            }
            const auto local = vertex_max(local_norm_gradient_polynomial(net, nb));
            c.expect(local.value <= global.value + 1e-12,
                     "local oracle " + fmt(local.value) + " > global " + fmt(global.value));
            const auto ltheta = bound(net, k, BoundMode::Sparse, "local", true, nb);
            ++cells;
            if (ltheta.theta <= gtheta.theta + 1e-9)
                ++gap;
            log << " [" << n << ", eps " << eps << ": " << fmt(ltheta.theta) << " vs " << fmt(gtheta.theta) << "]";
        }
    }
    std::cerr << "local vs global theta:" << log.str() << '\n';
    return finish(c, "5 nets x 3 radii; local theta <= global theta on " + std::to_string(gap) + "/" +
                         std::to_string(cells) + " cells (logged, expected >= 90%)");
}

LinearProgram lp_from(const MatrixXd& A, const VectorXd& b, const VectorXd& c)
{
    LinearProgram lp;
    lp.A = A.sparseView();
    lp.b = b;
    lp.cost = c;
    lp.free.assign(static_cast<std::size_t>(A.cols()), false);
    return lp;
}

double enumerate_vertices(const MatrixXd& A_in, const VectorXd& b_in, const VectorXd& c)
{
    // keep a maximal set of independent rows; b lies in the range of A, so the rest are redundant
    const Eigen::ColPivHouseholderQR<MatrixXd> qr(A_in.transpose());
    const Index rank = qr.rank();
    MatrixXd A(rank, A_in.cols());
    VectorXd b(rank);
    for (Index i = 0; i < rank; ++i) {
        A.row(i) = A_in.row(qr.colsPermutation().indices()[i]);
        b[i] = b_in[qr.colsPermutation().indices()[i]];
    }
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (m == 0)
        return c.minCoeff() >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
        if (__builtin_popcount(mask) != m)
            continue;
        MatrixXd B(m, m);
        std::vector<int> cols;
        for (int j = 0; j < n; ++j)
            if (mask & (1U << j)) {
                B.col(static_cast<Index>(cols.size())) = A.col(j);
                cols.push_back(j);
            }
        Eigen::FullPivLU<MatrixXd> lu(B);
        if (lu.rank() < m)
            continue;
        const VectorXd xb = lu.solve(b);
        if (xb.minCoeff() < -1e-10)
            continue;
        double obj = 0.0;
        for (int i = 0; i < m; ++i)
            obj += c[cols[static_cast<std::size_t>(i)]] * xb[i];
        best = std::min(best, obj);
    }
    return best;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion10(const std::string& golden_dir)
{
    Check c;
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> u(-1, 1);
    std::uniform_real_distribution<double> pos(0, 1);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int n = 3 + static_cast<int>(rng() % 6);
        const int m = 1 + static_cast<int>(rng() % static_cast<unsigned>(n - 1));
        MatrixXd A(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
                A(i, j) = (rng() % 3 == 0) ? 0.0 : u(rng);
        VectorXd x0(n), y(m), s(n);
        for (int j = 0; j < n; ++j) {
            x0[j] = (rng() % 3 == 0) ? 0.0 : pos(rng);
            s[j] = pos(rng);
        }
        for (int i = 0; i < m; ++i)
            y[i] = u(rng);
        const VectorXd b = A * x0;
        const VectorXd cost = A.transpose() * y + s;
        const auto sol = solve(lp_from(A, b, cost));
        const double ref = enumerate_vertices(A, b, cost);
        c.expect(sol.status == LPStatus::Optimal, "LP " + std::to_string(t) + " not optimal");
        worst = std::max(worst, std::abs(sol.objective - ref));
        c.expect(std::abs(sol.objective - ref) <= 1e-7,
                 "LP " + std::to_string(t) + ": " + fmt(sol.objective) + " vs " + fmt(ref));
    }

    // golden MPS files
    std::vector<WeightMatrix> layers;
    layers.emplace_back(MatrixXd::Ones(1, 1));
    layers.emplace_back(MatrixXd::Ones(1, 1));
    const Network one(std::move(layers), Activation::Elu);
    const Polynomial p = norm_gradient_polynomial(one);
    const auto lp = assemble_lp(p, prune_degree2_terms(p, enumerate_terms(dense_pattern(2), 2)).terms);
    std::ostringstream a, b;
    export_mps(lp, a);
    export_mps(lp, b);
    c.expect(a.str() == b.str(), "MPS export not stable across runs");
    const std::string golden = read_file(golden_dir + "/one11_k2.mps");
    c.expect(!golden.empty(), "golden file missing");
    c.expect(a.str() == golden, "MPS differs from golden one11_k2.mps");

    MatrixXd A(2, 3);
    A << 1, -1, 0, 0, 0.5, 0;
    VectorXd rhs(2), cost(3);
    rhs << 1, 0;
    cost << 1, 0, 0;
    auto tiny = lp_from(A, rhs, cost);
    tiny.free[0] = true;
    std::ostringstream t;
    write_mps(tiny, t);
    c.expect(t.str() == read_file(golden_dir + "/tiny.mps"), "MPS differs from golden tiny.mps");
    return finish(c, "20 random LPs, max |diff| " + fmt(worst) + "; golden MPS files byte-identical");
}

Outcome criterion11()
{
    const auto t = std::chrono::steady_clock::now();
    Check c;
    const Network base = random_network(std::vector<Index>{50, 30, 1}, 0, 2024);
    const Network net = prune_network(base, 0.9);
    const auto r = bound(net, 3, BoundMode::Sparse, "pruned 50x30x1 k=3");
    const double l = lbs(net);
    const double u = ubp(net);
    c.expect(r.status == LPStatus::Optimal, "status " + std::string(to_string(r.status)));
    c.expect(r.terms <= default_max_terms, "term count " + std::to_string(r.terms));
    c.expect(l <= r.theta + 1e-7, "lbs " + fmt(l) + " > theta_3 " + fmt(r.theta));
    c.expect(r.theta <= u + 1e-9, "theta_3 " + fmt(r.theta) + " > ubp " + fmt(u));
    const double s = seconds_since(t);
    c.expect(s < 900.0, "runtime " + fmt(s) + " s");
    return finish(c, "trained-network table not reproduced (needs a trained network); substitute run: " +
                         std::to_string(net.weight_count()) + " weights, " + std::to_string(r.terms) +
                         " terms, lbs=" + fmt(l) + " <= theta_3=" + fmt(r.theta) + " <= ubp=" + fmt(u) + ", " +
                         fmt(s) + " s");
}

Outcome criterion12(const std::string& python, const std::string& script, const std::string& cli)
{
    if (python.empty() || script.empty() || cli.empty())
        return {Outcome::Kind::Skip, "no python interpreter configured"};
    const std::string cmd = python + " " + script + " " + cli;
    const int status = std::system(cmd.c_str());
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code == 77)
        return {Outcome::Kind::Skip, "external solvers not available"};
    if (code == 0)
        return {Outcome::Kind::Pass, "MPS re-solved with HiGHS within 1e-6; SDPA bound >= oracle - 1e-6"};
    return {Outcome::Kind::Fail, "cross-check script exited with " + std::to_string(code)};
}

} // namespace

int main(int argc, char** argv)
{
    std::string golden_dir = LIPOPT_GOLDEN_DIR;
    std::string python = LIPOPT_PYTHON;
    std::string script = LIPOPT_CROSSCHECK;
    std::string cli = LIPOPT_CLI_PATH;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--no-external")
            python.clear();

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"dense Krivine term counts at n = 884", criterion1},
        {"exact bound on the 1-1-1 network", criterion2},
        {"lbs <= oracle <= theta_k sandwich on 30 random nets", criterion3},
        {"hierarchy monotonicity", criterion4},
        {"sparse terms inside dense terms, theta_sparse >= theta_dense", criterion5},
        {"certificate residual <= 1e-6", criterion6},
        {"degree-2 pruning leaves theta_2 unchanged", criterion7},
        {"gradient against central differences", criterion8},
        {"local bounds: containment and oracle ordering", criterion9},
        {"simplex against vertex enumeration; golden MPS", [&] { return criterion10(golden_dir); }},
        {"pruned 50x30x1 network at k = 3", criterion11},
        {"external solver cross-check", [&] { return criterion12(python, script, cli); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Outcome::Kind::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.kind == Outcome::Kind::Pass ? "PASS" : o.kind == Outcome::Kind::Fail ? "FAIL" : "SKIP";
        if (o.kind == Outcome::Kind::Fail)
            ++failed;
        std::cout << tag << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << criteria[i].first << "  ("
                  << o.detail << ")" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
