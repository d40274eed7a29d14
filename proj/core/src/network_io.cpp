#include "gridstrength/network_model.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"
#include "yaml_support.hpp"

#include <fstream>
#include <sstream>

namespace gridstrength::network {

namespace {

using yaml_support::require_map;
using yaml_support::require_number;
using yaml_support::require_string;

NodeKind parse_kind(const std::string& raw, const std::string& where) {
    if (raw == "wind_farm") {
        return NodeKind::WindFarm;
    }
    if (raw == "interior") {
        return NodeKind::Interior;
    }
    if (raw == "infinite_bus") {
        return NodeKind::InfiniteBus;
    }
    throw InputError(where + ": unknown kind '" + raw +
                     "' (expected wind_farm, interior or infinite_bus)");
}

void reject_resistive_key(const std::string& key, const std::string& where) {
    if (key == "r_pu" || key == "r" || key == "resistance" || key == "g_pu" ||
        key == "conductance" || key == "shunt" || key == "b_shunt_pu") {
        throw InputError(where + ": field '" + key +
                         "' is not supported; the network model is purely susceptive");
    }
}

}  // namespace

NetworkSpec parse_network(std::string_view text) {
    const YAML::Node root = yaml_support::load(text, "network");
    require_map(root, "network document");
    yaml_support::check_keys(root, "network document",
                             {"s_global_mva", "nodes", "branches", "name", "description"});

    const double s_global = require_number(root, "s_global_mva", "network document");

    const YAML::Node nodes_node = root["nodes"];
    if (!nodes_node || !nodes_node.IsSequence()) {
        throw InputError("network document: 'nodes' must be a list");
    }
    std::vector<Node> nodes;
    for (std::size_t i = 0; i < nodes_node.size(); ++i) {
        const YAML::Node item = nodes_node[i];
        std::string where = "nodes[" + std::to_string(i) + "]";
        require_map(item, where);
        const std::string id = require_string(item, "id", where);
        where += " (id " + id + ")";
        for (const auto& kv : item) {
            reject_resistive_key(kv.first.Scalar(), where);
        }
        yaml_support::check_keys(item, where, {"id", "kind", "capacity_mva", "note"});
        Node node;
        node.id = id;
        node.kind = parse_kind(require_string(item, "kind", where), where);
        if (node.kind == NodeKind::WindFarm) {
            node.capacity_mva = require_number(item, "capacity_mva", where);
        } else if (item["capacity_mva"]) {
            throw InputError(where + ": capacity_mva is only meaningful for wind_farm nodes");
        }
        nodes.push_back(std::move(node));
    }

    const YAML::Node branches_node = root["branches"];
    if (!branches_node || !branches_node.IsSequence()) {
        throw InputError("network document: 'branches' must be a list");
    }
    std::vector<Branch> branches;
    for (std::size_t i = 0; i < branches_node.size(); ++i) {
        const YAML::Node item = branches_node[i];
        const std::string where = "branches[" + std::to_string(i) + "]";
        require_map(item, where);
        for (const auto& kv : item) {
            reject_resistive_key(kv.first.Scalar(), where);
        }
        yaml_support::check_keys(item, where, {"from", "to", "b_pu", "note"});
        Branch b;
        b.from = require_string(item, "from", where);
        b.to = require_string(item, "to", where);
        b.b_pu = require_number(item, "b_pu", where + " (" + b.from + " -- " + b.to + ")");
        branches.push_back(std::move(b));
    }

    return make_network_spec(s_global, std::move(nodes), std::move(branches));
}

NetworkSpec load_network(const std::filesystem::path& path) {
    return parse_network(yaml_support::read_file(path));
}

}  // namespace gridstrength::network
