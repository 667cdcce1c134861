#pragma once

#include "moma/instance_io.hpp"
#include "moma/lattice.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace moma {

/// Flat "section.key" -> value map; later sources override earlier ones.
using ConfigMap = std::map<std::string, std::string>;

struct RunConfig {
    // [problem]
    std::string problem = "simple_rw";
    std::int64_t n = 0; ///< random-walk size; 0 picks the default
    bool absorbing = true;
    double load = 0.7;
    std::optional<double> alpha;
    std::string instance;
    std::string policy = "optimal"; ///< optimal | zero | path to a JSON action list
    std::vector<Coord> lower, upper; ///< for problem = box
    std::vector<Coord> grid_origin;
    std::string grid_values; ///< explicit axes, e.g. "0,20" or "0,1,3;0,2"
    // [solver]
    std::string mode = "evaluate";
    double spacing = 0.45;
    double epsilon = 0.5;
    std::uint64_t seed = 1;
    int threads = 0;
    double tolerance = 1e-12;
    int max_iterations = 100;
    bool discount_multiplier = false;
    bool exact = true;
    std::size_t nnz_budget = 50'000'000;
    int mstep = 2;
    // [output]
    std::filesystem::path out_dir = "moma_out";
    bool write_csv = true;
};

/// Keys accepted in config files, as "section.key".
const std::vector<std::string>& config_keys();

/// Parses an INI file with [problem], [solver] and [output] sections.
ConfigMap read_config_file(const std::filesystem::path& path);
/// Overrides from MOMA_<SECTION>_<KEY> environment variables.
void apply_env_overrides(ConfigMap& kv);
/// Validates and converts; throws ConfigError.
RunConfig parse_config(const ConfigMap& kv);

struct RunOutcome {
    int exit_code = 0; ///< 0 ok, 1 config error, 2 numerical failure
    Json summary;
    std::string message;
};

/// Executes one run and writes its artifacts into config.out_dir.
RunOutcome run(const RunConfig& config);

/// 17 significant digits, '.' decimal point, locale independent.
std::string format_double(double v);

} // namespace moma
