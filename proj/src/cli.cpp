#include "lipopt/cli.hpp"

#include "lipopt/errors.hpp"
#include "lipopt/oracle.hpp"
#include "lipopt/sdp.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace lipopt::cli {

using nlohmann::ordered_json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string arch_name(const std::vector<Index>& widths)
{
    std::string s;
    for (std::size_t i = 0; i < widths.size(); ++i)
        s += (i ? "x" : "") + std::to_string(widths[i]);
    return s;
}

} // namespace

std::string csv_number(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

Network resolve_network(const RunConfig& cfg)
{
    if (cfg.generator)
        return random_network(cfg.generator->widths, cfg.generator->sparsity, cfg.generator->seed);
    if (cfg.net_path.empty())
        throw DomainError("no network given: pass a network file or generator widths");
    return load_network_file(cfg.net_path, cfg.output_index);
}

Eigen::VectorXd load_point(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open point file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("point JSON: ") + e.what());
    }
    if (!doc.is_array())
        throw ParseError("point file must hold a JSON array of numbers");
    Eigen::VectorXd x(static_cast<Index>(doc.size()));
    for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_number())
            throw ParseError("point file must hold a JSON array of numbers");
        x[static_cast<Index>(i)] = doc[i].get<double>();
    }
    return x;
}

std::size_t term_cap_from_env(std::size_t fallback)
{
    const char* env = std::getenv("LIPOPT_MAX_TERMS");
    if (!env || !*env)
        return fallback;
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0)
        throw ParseError("LIPOPT_MAX_TERMS must be a positive integer");
    return static_cast<std::size_t>(v);
}

namespace {

BoundOptions bound_options(const RunConfig& cfg, const Network& net, unsigned k)
{
    BoundOptions opt;
    opt.k = k;
    opt.mode = cfg.mode;
    opt.max_terms = cfg.max_terms;
    opt.simplex.max_pivots = cfg.max_pivots;
    if (!cfg.x0_path.empty()) {
        const auto x0 = load_point(cfg.x0_path);
        opt.bounds = derivative_bounds(net, preactivation_bounds(net, x0, cfg.eps));
    }
    return opt;
}

} // namespace

int cmd_bound(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.eps < 0.0)
        throw DomainError("eps must be nonnegative");
    const Network net = resolve_network(cfg);
    BoundReport report;
    try {
        report = lipopt_bound(net, bound_options(cfg, net, cfg.k));
    } catch (const ResourceLimitError& e) {
        ordered_json j;
        j["theta"] = "inf";
        j["k"] = cfg.k;
        j["mode"] = std::string(to_string(cfg.mode));
        j["status"] = "resource_limit";
        j["message"] = e.what();
        out << j.dump() << '\n';
        return exit_resource;
    }
    out << to_json(report) << '\n';
    switch (report.status) {
    case LPStatus::Optimal:
        return exit_ok;
    case LPStatus::Infeasible:
        return exit_infeasible;
    case LPStatus::IterationLimit:
        return exit_resource;
    case LPStatus::Unbounded:
        return exit_error;
    }
    return exit_error;
}

int cmd_baseline(const RunConfig& cfg, std::ostream& out)
{
    const Network net = resolve_network(cfg);
    ordered_json j;
    j["method"] = cfg.method;
    const auto start = std::chrono::steady_clock::now();
    if (cfg.method == "ubp") {
        j["value"] = ubp(net);
    } else if (cfg.method == "lbs") {
        j["value"] = lbs(net, {cfg.samples, cfg.radius, cfg.seed});
        j["samples"] = cfg.samples;
        j["radius"] = cfg.radius;
        j["seed"] = cfg.seed;
    } else if (cfg.method == "oracle") {
        try {
            const auto r = vertex_max(norm_gradient_polynomial(net));
            j["value"] = r.value;
            j["vertices"] = r.vertices;
            j["argmax"] = r.argmax;
        } catch (const ResourceLimitError& e) {
            j["status"] = "resource_limit";
            j["message"] = e.what();
            out << j.dump() << '\n';
            return exit_resource;
        }
    } else {
        throw DomainError("unknown baseline '" + cfg.method + "' (ubp, lbs, oracle)");
    }
    j["seconds"] = seconds_since(start);
    out << j.dump() << '\n';
    return exit_ok;
}

namespace {

struct SweepRow {
    std::string arch;
    std::string sparsity;
    std::uint64_t seed = 0;
    double lbs = 0.0;
    double oracle = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> theta;
    double ubp = 0.0;
    double seconds_lbs = 0.0;
    double seconds_oracle = 0.0;
    std::vector<double> seconds_theta;
    double seconds_ubp = 0.0;
    std::string error;
};

SweepRow run_cell(const RunConfig& cfg, const std::vector<Index>& arch, Index r, std::uint64_t seed)
{
    SweepRow row;
    row.arch = arch_name(arch);
    row.sparsity = r == 0 ? "full" : std::to_string(r);
    row.seed = seed;
    row.theta.assign(cfg.degrees.size(), std::numeric_limits<double>::quiet_NaN());
    row.seconds_theta.assign(cfg.degrees.size(), 0.0);
    try {
        const Network net = random_network(arch, r, seed);
        auto t = std::chrono::steady_clock::now();
        row.lbs = lbs(net, {cfg.samples, cfg.radius, seed});
        row.seconds_lbs = seconds_since(t);

        t = std::chrono::steady_clock::now();
        row.ubp = ubp(net);
        row.seconds_ubp = seconds_since(t);

        const Polynomial p = norm_gradient_polynomial(net);
        if (cfg.with_oracle && p.nvars() <= default_vertex_cap) {
            t = std::chrono::steady_clock::now();
            row.oracle = vertex_max(p).value;
            row.seconds_oracle = seconds_since(t);
        }
        for (std::size_t i = 0; i < cfg.degrees.size(); ++i) {
            try {
                BoundOptions opt;
                opt.k = cfg.degrees[i];
                opt.mode = cfg.mode;
                opt.max_terms = cfg.max_terms;
                opt.simplex.max_pivots = cfg.max_pivots;
                const auto rep = lipopt_bound(net, opt);
                row.theta[i] = rep.theta;
                row.seconds_theta[i] = rep.seconds;
            } catch (const Error& e) {
                row.error += (row.error.empty() ? "" : "; ") + ("k=" + std::to_string(cfg.degrees[i]) + ": " + e.what());
            }
        }
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s)
        q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + '"';
}

std::string csv_optional(double v) { return std::isnan(v) ? "" : csv_number(v); }

} // namespace

int cmd_sweep(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.architectures.empty())
        throw DomainError("sweep needs at least one architecture");
    if (cfg.degrees.empty())
        throw DomainError("sweep needs at least one hierarchy degree");
    const std::vector<Index> sparsities = cfg.sparsities.empty() ? std::vector<Index>{0} : cfg.sparsities;

    struct Cell {
        const std::vector<Index>* arch;
        Index r;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const auto& arch : cfg.architectures)
        for (auto r : sparsities)
            for (unsigned s = 0; s < cfg.networks_per_cell; ++s)
                cells.push_back({&arch, r, cfg.seed_base + s});

    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
            rows[i] = run_cell(cfg, *cells[i].arch, cells[i].r, cells[i].seed);
    };
    const unsigned jobs = std::max(1U, cfg.jobs);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();

    out << "arch,sparsity,seed,lbs,oracle";
    for (auto k : cfg.degrees)
        out << ",theta_k" << k;
    out << ",ubp";
    for (auto k : cfg.degrees)
        out << ",relerr_k" << k;
    out << ",lbs_ok,ubp_ok,seconds_lbs,seconds_oracle";
    for (auto k : cfg.degrees)
        out << ",seconds_k" << k;
    out << ",seconds_ubp,error\n";

    for (const auto& row : rows) {
        bool lbs_ok = true;
        bool ubp_ok = true;
        for (double th : row.theta) {
            if (std::isnan(th))
                continue;
            lbs_ok = lbs_ok && row.lbs <= th + 1e-9;
            ubp_ok = ubp_ok && th <= row.ubp + 1e-9;
        }
        out << row.arch << ',' << row.sparsity << ',' << row.seed << ',' << csv_number(row.lbs) << ','
            << csv_optional(row.oracle);
        for (double th : row.theta)
            out << ',' << csv_optional(th);
        out << ',' << csv_number(row.ubp);
        for (double th : row.theta)
            out << ',' << (std::isnan(th) || row.lbs == 0.0 ? std::string() : csv_number((th - row.lbs) / row.lbs));
        out << ',' << (lbs_ok ? "true" : "false") << ',' << (ubp_ok ? "true" : "false") << ','
            << csv_number(row.seconds_lbs) << ',' << csv_number(row.seconds_oracle);
        for (double s : row.seconds_theta)
            out << ',' << csv_number(s);
        out << ',' << csv_number(row.seconds_ubp) << ',' << csv_field(row.error) << '\n';
    }
    return exit_ok;
}

int cmd_gen_random(const RunConfig& cfg, std::ostream& out)
{
    if (!cfg.generator)
        throw DomainError("gen-random needs generator widths");
    out << save_network(resolve_network(cfg));
    return exit_ok;
}

int cmd_prune(const RunConfig& cfg, std::ostream& out)
{
    out << save_network(prune_network(resolve_network(cfg), cfg.fraction));
    return exit_ok;
}

int cmd_export(const RunConfig& cfg, std::ostream& out)
{
    const Network net = resolve_network(cfg);
    if (cfg.format == "sdpa") {
        export_sdpa(shor_relax(qcqp_reformulate(net)), out);
        return exit_ok;
    }
    if (cfg.format != "mps")
        throw DomainError("unknown export format '" + cfg.format + "' (mps, sdpa)");
    const BoundOptions opt = bound_options(cfg, net, cfg.k);
    const Polynomial p = opt.bounds ? local_norm_gradient_polynomial(net, *opt.bounds) : norm_gradient_polynomial(net);
    const VariableIndexing idx(net);
    const SparsityPattern pattern = cfg.mode == BoundMode::Dense ? dense_pattern(idx.total())
                                                                 : induced_pattern(computational_graph(net), idx);
    try {
        auto terms = enumerate_terms(pattern, cfg.k, cfg.max_terms);
        if (cfg.k == 2)
            terms = prune_degree2_terms(p, std::move(terms)).terms;
        export_mps(assemble_lp(p, std::move(terms)), out);
    } catch (const ResourceLimitError&) {
        throw;
    }
    return exit_ok;
}

int cmd_validate_pattern(const RunConfig& cfg, std::ostream& out)
{
    const Network net = resolve_network(cfg);
    const VariableIndexing idx(net);
    const auto pattern = induced_pattern(computational_graph(net), idx);
    const auto report = validate_pattern(pattern, norm_gradient_polynomial(net));
    const auto stats = clique_stats(pattern, cfg.k);

    ordered_json j = ordered_json::parse(pattern_json(pattern));
    j["covers"] = report.covers;
    j["decomposes"] = report.decomposes;
    j["m"] = stats.cliques;
    j["s_max"] = stats.largest;
    j["k"] = stats.k;
    j["term_bound"] = stats.term_bound;
    j["saturated"] = stats.saturated;
    out << j.dump() << '\n';
    return exit_ok;
}

} // namespace lipopt::cli
