#pragma once

#include "moma/chain.hpp"
#include "moma/control.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>

namespace moma {

/**
 * JSON instance format.
 *
 *   { "format": "moma-instance", "version": 1, "kind": "mrp" | "mdp",
 *     "lower": [...], "upper": [...], "discount": a,
 *     "cost": [...], "transitions": [[[col, p], ...], ...]        (mrp)
 *     "actions": [[{"cost": c, "next": [[col, p], ...]}, ...], ...] (mdp)
 *     "grid_origin": [...] (optional) }
 *
 * Columns are flat lattice indices (row-major, axis 0 slowest).
 */
using Json = nlohmann::ordered_json;

Json export_mrp(const MarkovRewardProcess& mrp);
MarkovRewardProcess import_mrp(const Json& j);

/// Materializes every (state, action) row; intended for small instances.
Json export_mdp(const ControlledMdp& mdp);
std::unique_ptr<TabularMdp> import_mdp(const Json& j);

/// Throws ConfigError on unreadable or malformed files.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

} // namespace moma
