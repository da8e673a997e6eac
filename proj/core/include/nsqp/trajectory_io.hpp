#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsqp/path_grid.hpp"

namespace nsqp {

/// CSV with header "t,h_norm,v_norm" and one row per node.
void write_trajectory_csv(std::ostream& out, const PathGrid& path);

/// Writes every `stride`-th node (and the last) as "<prefix>_<node>.bin" in the binary field
/// format; returns the written paths.
std::vector<std::filesystem::path> write_snapshots(const std::filesystem::path& dir, const PathGrid& path,
                                                   std::size_t stride, const std::string& prefix = "snapshot");

/// Formats a double with 17 significant digits, the precision used by every CSV writer here.
std::string format_double(double value);

}  // namespace nsqp
