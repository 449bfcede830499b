#pragma once

#include <filesystem>

#include <json.hpp>

#include "droc/noise_learning.hpp"

namespace droc {

/**
 * Binary training-set file:
 *
 *   8 bytes   magic "DROCTS01"
 *   8 bytes   header length L (little-endian u64)
 *   L bytes   JSON header {format, version, state_dim, m, N, grid, seed, dtype, columns}
 *   payload   little-endian float64 columns: for each state dimension the m grid
 *             coordinates, then for each state dimension the m×N noise values
 *             (state-major, realization fastest).
 */
void writeTrainingSet(const TrainingSet& ts, const std::filesystem::path& path);
TrainingSet readTrainingSet(const std::filesystem::path& path);

nlohmann::json gridToJson(const GridSpec& grid);
GridSpec gridFromJson(const nlohmann::json& j);

}  // namespace droc
