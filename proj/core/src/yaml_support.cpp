#include "yaml_support.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gridstrength::yaml_support {

YAML::Node load(std::string_view text, std::string_view what) {
    try {
        return YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw InputError("malformed " + std::string(what) + " document: " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot read '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw InputError("cannot read '" + path.string() + "'");
    }
    return buf.str();
}

void require_map(const YAML::Node& node, const std::string& where) {
    if (!node || !node.IsMap()) {
        throw InputError(where + ": expected a mapping");
    }
}

void check_keys(const YAML::Node& map, const std::string& where,
                std::initializer_list<std::string_view> allowed) {
    for (const auto& kv : map) {
        const std::string& key = kv.first.Scalar();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw InputError(where + ": unknown field '" + key + "'");
        }
    }
}

double require_number(const YAML::Node& map, const std::string& key, const std::string& where) {
    const YAML::Node value = map[key];
    if (!value) {
        throw InputError(where + ": missing field '" + key + "'");
    }
    if (!value.IsScalar()) {
        throw InputError(where + ": field '" + key + "' must be a number");
    }
    return text::parse_double(value.Scalar(), where + "." + key);
}

double optional_number(const YAML::Node& map, const std::string& key, const std::string& where,
                       double fallback) {
    if (!map[key]) {
        return fallback;
    }
    return require_number(map, key, where);
}

std::string require_string(const YAML::Node& map, const std::string& key,
                           const std::string& where) {
    const YAML::Node value = map[key];
    if (!value) {
        throw InputError(where + ": missing field '" + key + "'");
    }
    if (!value.IsScalar() || value.Scalar().empty()) {
        throw InputError(where + ": field '" + key + "' must be a non-empty string");
    }
    return value.Scalar();
}

}  // namespace gridstrength::yaml_support
