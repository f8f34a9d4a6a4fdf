#pragma once

#include <filesystem>
#include <vector>

#include "rsr/model.hpp"

namespace rsr {

/// One row per draw: draw,sigma2,tau2,gamma,delta_1..p,beta_1..p,ymiss_1..n_m.
/// gamma is left empty for families without it.
void write_draws_csv(const std::filesystem::path& path, const std::vector<PosteriorDraw>& draws);

/// Reads a draw CSV back; g is not part of the file and comes back empty.
std::vector<PosteriorDraw> read_draws_csv(const std::filesystem::path& path);

/// Wide file draw,g_1..g_n.
void write_g_csv(const std::filesystem::path& path, const std::vector<PosteriorDraw>& draws);
Matrix read_g_csv(const std::filesystem::path& path);

} // namespace rsr
