#include "lipopt/cli.hpp"
#include "lipopt/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace lipopt;
using lipopt::cli::RunConfig;

std::vector<Index> parse_widths(const std::string& text)
{
    std::vector<Index> widths;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != part.size() || part.empty() || v <= 0)
            throw ParseError("bad architecture '" + text + "' (expected e.g. 40x40x1)");
        widths.push_back(static_cast<Index>(v));
    }
    return widths;
}

Index parse_sparsity(const std::string& text)
{
    if (text == "full")
        return 0;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size() && v > 0)
            return static_cast<Index>(v);
    } catch (const std::exception&) {
    }
    throw ParseError("bad sparsity '" + text + "' (a positive fan-in or 'full')");
}

struct SourceArgs {
    std::string arch;
    std::string sparsity = "full";
    std::uint64_t seed = 0;
    long long output_index = -1;
};

void add_source(CLI::App* cmd, RunConfig& cfg, SourceArgs& src)
{
    cmd->add_option("--net", cfg.net_path, "network JSON file");
    cmd->add_option("--arch", src.arch, "generate a random network with these widths, e.g. 5x5x1");
    cmd->add_option("--sparsity", src.sparsity, "fan-in of generated neurons, or 'full'");
    cmd->add_option("--gen-seed", src.seed, "seed of the generated network");
    cmd->add_option("--output-index", src.output_index, "row of a multi-output final layer to bound");
}

void finish_source(RunConfig& cfg, const SourceArgs& src)
{
    if (!src.arch.empty())
        cfg.generator = cli::GeneratorSpec{parse_widths(src.arch), parse_sparsity(src.sparsity), src.seed};
    if (src.output_index >= 0)
        cfg.output_index = static_cast<Index>(src.output_index);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Certified l_inf Lipschitz upper bounds for feed-forward networks"};
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    SourceArgs src;
    std::string out_path;
    std::string mode = "sparse";
    std::vector<std::string> archs;
    std::vector<std::string> sparsities;

    app.add_option("-o,--output", out_path, "write the report here instead of stdout");

    auto* bound = app.add_subcommand("bound", "LP hierarchy upper bound");
    add_source(bound, cfg, src);
    bound->add_option("--k", cfg.k, "hierarchy degree")->check(CLI::PositiveNumber);
    bound->add_option("--mode", mode, "dense or sparse")->check(CLI::IsMember({"dense", "sparse"}));
    bound->add_option("--local", cfg.x0_path, "JSON array with the center of a local bound");
    bound->add_option("--eps", cfg.eps, "l_inf radius around the center")->check(CLI::NonNegativeNumber);
    bound->add_option("--max-pivots", cfg.max_pivots, "simplex pivot limit");

    auto* baseline = app.add_subcommand("baseline", "ubp, lbs or vertex-oracle value");
    add_source(baseline, cfg, src);
    baseline->add_option("--method", cfg.method)->check(CLI::IsMember({"ubp", "lbs", "oracle"}));
    baseline->add_option("--samples", cfg.samples)->check(CLI::PositiveNumber);
    baseline->add_option("--radius", cfg.radius)->check(CLI::PositiveNumber);
    baseline->add_option("--seed", cfg.seed);

    auto* sweep = app.add_subcommand("sweep", "random-network experiment grid as CSV");
    sweep->add_option("--arch", archs, "architectures, e.g. 40x40x1")->required();
    sweep->add_option("--sparsity", sparsities, "fan-ins or 'full'");
    sweep->add_option("--k", cfg.degrees, "hierarchy degrees");
    sweep->add_option("--mode", mode)->check(CLI::IsMember({"dense", "sparse"}));
    sweep->add_option("--networks", cfg.networks_per_cell, "networks per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", cfg.seed_base, "first network seed");
    sweep->add_option("--samples", cfg.samples)->check(CLI::PositiveNumber);
    sweep->add_option("--radius", cfg.radius)->check(CLI::PositiveNumber);
    sweep->add_flag("--oracle", cfg.with_oracle, "add the exact vertex maximum when small enough");
    sweep->add_option("--jobs", cfg.jobs)->check(CLI::PositiveNumber);
    sweep->add_option("--max-pivots", cfg.max_pivots);

    auto* gen = app.add_subcommand("gen-random", "write a random network as JSON");
    add_source(gen, cfg, src);

    auto* prune = app.add_subcommand("prune", "drop the smallest weights");
    add_source(prune, cfg, src);
    prune->add_option("--fraction", cfg.fraction)->required()->check(CLI::Range(0.0, 1.0));

    auto* exp = app.add_subcommand("export", "write the LP (mps) or the Shor relaxation (sdpa)");
    add_source(exp, cfg, src);
    exp->add_option("--format", cfg.format)->check(CLI::IsMember({"mps", "sdpa"}));
    exp->add_option("--k", cfg.k)->check(CLI::PositiveNumber);
    exp->add_option("--mode", mode)->check(CLI::IsMember({"dense", "sparse"}));
    exp->add_option("--local", cfg.x0_path);
    exp->add_option("--eps", cfg.eps)->check(CLI::NonNegativeNumber);

    auto* validate = app.add_subcommand("validate-pattern", "induced cliques and their checks");
    add_source(validate, cfg, src);
    validate->add_option("--k", cfg.k)->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        finish_source(cfg, src);
        cfg.mode = parse_bound_mode(mode);
        cfg.max_terms = cli::term_cap_from_env(cfg.max_terms);
        for (const auto& a : archs)
            cfg.architectures.push_back(parse_widths(a));
        for (const auto& s : sparsities)
            cfg.sparsities.push_back(parse_sparsity(s));

        std::ofstream file;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file)
                throw Error("cannot open '" + out_path + "' for writing");
        }
        std::ostream& out = out_path.empty() ? std::cout : file;

        if (*bound)
            return cli::cmd_bound(cfg, out);
        if (*baseline)
            return cli::cmd_baseline(cfg, out);
        if (*sweep)
            return cli::cmd_sweep(cfg, out);
        if (*gen)
            return cli::cmd_gen_random(cfg, out);
        if (*prune)
            return cli::cmd_prune(cfg, out);
        if (*exp)
            return cli::cmd_export(cfg, out);
        if (*validate)
            return cli::cmd_validate_pattern(cfg, out);
    } catch (const ResourceLimitError& e) {
        std::cerr << "lipopt: " << e.what() << '\n';
        return cli::exit_resource;
    } catch (const std::exception& e) {
        std::cerr << "lipopt: " << e.what() << '\n';
        return cli::exit_error;
    }
    return cli::exit_error;
}
