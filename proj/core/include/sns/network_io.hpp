#pragma once

#include <filesystem>
#include <string>

#include "sns/network.hpp"

namespace sns {

/// {n, dt, e_lo, e_hi, tau, b, W, V, mask, clamped}. Doubles are written with
/// the shortest decimal form that reads back to the same value.
std::string params_to_json(const NetworkParams& params, int indent = 2);
NetworkParams params_from_json(const std::string& text);

void save_params(const NetworkParams& params, const std::filesystem::path& path);
NetworkParams load_params(const std::filesystem::path& path);

}  // namespace sns
