#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "sns/network.hpp"

namespace sns::detail {

nlohmann::json params_json(const NetworkParams& params);
NetworkParams params_from(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sns::detail
