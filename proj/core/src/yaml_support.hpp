#pragma once

// Private helpers shared by the YAML readers. Numbers are parsed from the raw
// scalar text so results never depend on the process locale.

#include <yaml-cpp/yaml.h>

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace gridstrength::yaml_support {

YAML::Node load(std::string_view text, std::string_view what);
std::string read_file(const std::filesystem::path& path);

void require_map(const YAML::Node& node, const std::string& where);
void check_keys(const YAML::Node& map, const std::string& where,
                std::initializer_list<std::string_view> allowed);

double require_number(const YAML::Node& map, const std::string& key, const std::string& where);
double optional_number(const YAML::Node& map, const std::string& key, const std::string& where,
                       double fallback);
std::string require_string(const YAML::Node& map, const std::string& key,
                           const std::string& where);

}  // namespace gridstrength::yaml_support
