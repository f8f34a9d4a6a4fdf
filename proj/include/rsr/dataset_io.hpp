#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rsr/model.hpp"

namespace rsr {

/// Shortest round-trip decimal form of `v`.
std::string format_number(double v);
/// Parses a complete field as a double; throws IoError otherwise.
double parse_number(std::string_view field);

std::vector<std::string> split_csv_line(std::string_view line);

/// Reads `site,y,x1..xp`; rows with an empty y become missing sites.
SpatialDataset read_dataset_csv(const std::filesystem::path& path);

/// Writes observed and missing sites merged and sorted by site, missing y empty.
void write_dataset_csv(const std::filesystem::path& path, const SpatialDataset& data);

} // namespace rsr
