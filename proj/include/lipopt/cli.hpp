#pragma once

#include "lipopt/certificate.hpp"
#include "lipopt/network.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lipopt::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_infeasible = 2;
inline constexpr int exit_resource = 3;

struct GeneratorSpec {
    std::vector<Index> widths;
    Index sparsity = 0; ///< 0 means fully connected
    std::uint64_t seed = 0;
};

struct RunConfig {
    // network source: a JSON path or a generator
    std::string net_path;
    std::optional<GeneratorSpec> generator;
    std::optional<Index> output_index;

    // bounding
    unsigned k = 2;
    BoundMode mode = BoundMode::Sparse;
    std::string x0_path; ///< non-empty selects local bounds
    double eps = 0.0;
    std::size_t max_terms = default_max_terms;
    long max_pivots = 1'000'000;

    // baselines
    std::string method = "ubp"; ///< ubp | lbs | oracle
    Index samples = 50000;
    double radius = 1.0;
    std::uint64_t seed = 0;

    // sweep
    std::vector<std::vector<Index>> architectures;
    std::vector<Index> sparsities; ///< 0 means fully connected
    std::vector<unsigned> degrees{2};
    unsigned networks_per_cell = 10;
    std::uint64_t seed_base = 0;
    bool with_oracle = false;
    unsigned jobs = 1;

    // prune / export
    double fraction = 0.0;
    std::string format = "mps"; ///< mps | sdpa
};

/// Loads or generates the network named by the config.
Network resolve_network(const RunConfig& cfg);

/// Reads the center point of a local run: a JSON array of numbers.
Eigen::VectorXd load_point(const std::string& path);

/// Applies LIPOPT_MAX_TERMS when set.
std::size_t term_cap_from_env(std::size_t fallback);

/// Writes the BoundReport JSON; returns 0 optimal, 2 infeasible, 3 on a resource cap.
int cmd_bound(const RunConfig& cfg, std::ostream& out);
/// ubp | lbs | oracle report JSON.
int cmd_baseline(const RunConfig& cfg, std::ostream& out);
/// Random-network sweep CSV, one row per (architecture, sparsity, seed).
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_gen_random(const RunConfig& cfg, std::ostream& out);
int cmd_prune(const RunConfig& cfg, std::ostream& out);
int cmd_export(const RunConfig& cfg, std::ostream& out);
int cmd_validate_pattern(const RunConfig& cfg, std::ostream& out);

/// %.9g, or "inf".
std::string csv_number(double v);

} // namespace lipopt::cli
