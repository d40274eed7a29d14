#include "gridstrength/network_model.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>
#include <utility>

namespace gridstrength::network {

namespace {

constexpr double kSingularRcond = 1e-12;

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) {
            out += ", ";
        }
        out += id;
    }
    return out;
}

std::string branch_label(const Branch& b) {
    return "branch " + b.from + " -- " + b.to;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::WindFarm:
        return "wind_farm";
    case NodeKind::Interior:
        return "interior";
    case NodeKind::InfiniteBus:
        return "infinite_bus";
    }
    return "unknown";
}

std::size_t NetworkSpec::infinite_bus_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) {
        return n.kind == NodeKind::InfiniteBus;
    }));
}

std::vector<double> NetworkSpec::farm_capacities_mva() const {
    std::unordered_map<std::string, double> caps;
    for (const auto& n : nodes_) {
        if (n.kind == NodeKind::WindFarm) {
            caps.emplace(n.id, n.capacity_mva);
        }
    }
    std::vector<double> out;
    out.reserve(farm_ids_.size());
    for (const auto& id : farm_ids_) {
        out.push_back(caps.at(id));
    }
    return out;
}

NetworkSpec make_network_spec(double s_global_mva, std::vector<Node> nodes,
                              std::vector<Branch> branches) {
    if (!std::isfinite(s_global_mva) || s_global_mva <= 0.0) {
        throw InputError("s_global_mva must be positive, got " + text::format_exact(s_global_mva));
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        if (n.id.empty()) {
            throw InputError("node #" + std::to_string(i) + " has an empty id");
        }
        if (!index.emplace(n.id, i).second) {
            throw InputError("duplicate node id '" + n.id + "'");
        }
        if (n.kind == NodeKind::WindFarm &&
            (!std::isfinite(n.capacity_mva) || n.capacity_mva <= 0.0)) {
            throw InputError("wind farm '" + n.id + "' must have a positive capacity_mva, got " +
                             text::format_exact(n.capacity_mva));
        }
    }

    NetworkSpec spec;
    spec.s_global_mva_ = s_global_mva;
    for (const auto& n : nodes) {
        if (n.kind == NodeKind::WindFarm) {
            spec.farm_ids_.push_back(n.id);
        } else if (n.kind == NodeKind::Interior) {
            spec.interior_ids_.push_back(n.id);
        }
    }
    if (spec.farm_ids_.empty()) {
        throw InputError("network has no wind_farm node");
    }
    if (std::none_of(nodes.begin(), nodes.end(),
                     [](const Node& n) { return n.kind == NodeKind::InfiniteBus; })) {
        throw InputError("no infinite bus: at least one node must have kind infinite_bus");
    }

    // Merge parallel branches on the unordered endpoint pair, keeping the
    // orientation and position of the first occurrence.
    std::map<std::pair<std::string, std::string>, std::size_t> merged;
    std::vector<Branch> unique;
    for (const auto& b : branches) {
        const auto from = index.find(b.from);
        const auto to = index.find(b.to);
        if (from == index.end()) {
            throw InputError(branch_label(b) + ": unknown node '" + b.from + "'");
        }
        if (to == index.end()) {
            throw InputError(branch_label(b) + ": unknown node '" + b.to + "'");
        }
        if (b.from == b.to) {
            throw InputError(branch_label(b) + ": self-branch is not allowed");
        }
        if (!std::isfinite(b.b_pu) || b.b_pu <= 0.0) {
            throw InputError(branch_label(b) + ": susceptance b_pu must be positive, got " +
                             text::format_exact(b.b_pu));
        }
        if (nodes[from->second].kind == NodeKind::InfiniteBus &&
            nodes[to->second].kind == NodeKind::InfiniteBus) {
            throw InputError(branch_label(b) + ": connects two infinite buses");
        }
        auto key = std::minmax(b.from, b.to);
        auto [it, inserted] = merged.emplace(std::pair{key.first, key.second}, unique.size());
        if (inserted) {
            unique.push_back(b);
        } else {
            unique[it->second].b_pu += b.b_pu;
        }
    }

    // Every non-source node must reach an infinite bus. Breadth-first search
    // from all infinite buses at once.
    std::vector<std::vector<std::size_t>> adjacency(nodes.size());
    for (const auto& b : unique) {
        const std::size_t i = index.at(b.from);
        const std::size_t j = index.at(b.to);
        adjacency[i].push_back(j);
        adjacency[j].push_back(i);
    }
    std::vector<bool> reached(nodes.size(), false);
    std::queue<std::size_t> frontier;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind == NodeKind::InfiniteBus) {
            reached[i] = true;
            frontier.push(i);
        }
    }
    while (!frontier.empty()) {
        const std::size_t i = frontier.front();
        frontier.pop();
        for (std::size_t j : adjacency[i]) {
            if (!reached[j]) {
                reached[j] = true;
                frontier.push(j);
            }
        }
    }
    std::vector<std::string> stranded;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!reached[i]) {
            stranded.push_back(nodes[i].id);
        }
    }
    if (!stranded.empty()) {
        throw InputError("disconnected node(s) with no path to an infinite bus: " +
                         join_ids(stranded));
    }

    spec.nodes_ = std::move(nodes);
    spec.branches_ = std::move(unique);
    return spec;
}

SusceptanceMatrices build_susceptance(const NetworkSpec& spec) {
    // Specs only come out of make_network_spec(), but a default-constructed
    // one is empty.
    if (spec.farm_count() == 0 || spec.infinite_bus_count() == 0) {
        throw InputError("build_susceptance: network spec is empty or invalid");
    }

    SusceptanceMatrices mats;
    mats.farm_count = spec.farm_count();
    mats.interior_count = spec.interior_count();
    mats.node_ids = spec.farm_ids();
    mats.node_ids.insert(mats.node_ids.end(), spec.interior_ids().begin(),
                         spec.interior_ids().end());

    std::unordered_map<std::string, Eigen::Index> position;
    for (std::size_t i = 0; i < mats.node_ids.size(); ++i) {
        position.emplace(mats.node_ids[i], static_cast<Eigen::Index>(i));
    }

    const auto size = static_cast<Eigen::Index>(mats.node_ids.size());
    mats.b_full = Eigen::MatrixXd::Zero(size, size);
    mats.ground_links = Eigen::VectorXd::Zero(size);

    for (const auto& b : spec.branches()) {
        const auto i = position.find(b.from);
        const auto j = position.find(b.to);
        const bool i_grounded = i == position.end();
        const bool j_grounded = j == position.end();
        if (i_grounded && j_grounded) {
            throw InputError("build_susceptance: " + branch_label(b) + " connects two infinite buses");
        }
        if (i_grounded || j_grounded) {
            const Eigen::Index k = i_grounded ? j->second : i->second;
            mats.ground_links(k) += b.b_pu;
            mats.b_full(k, k) += b.b_pu;
            continue;
        }
        mats.b_full(i->second, i->second) += b.b_pu;
        mats.b_full(j->second, j->second) += b.b_pu;
        mats.b_full(i->second, j->second) -= b.b_pu;
        mats.b_full(j->second, i->second) -= b.b_pu;
    }

    const auto caps = spec.farm_capacities_mva();
    mats.capacity_pu.resize(static_cast<Eigen::Index>(caps.size()));
    for (std::size_t i = 0; i < caps.size(); ++i) {
        mats.capacity_pu(static_cast<Eigen::Index>(i)) = caps[i] / spec.s_global_mva();
    }
    return mats;
}

KronReducedNetwork kron_reduce(const SusceptanceMatrices& mats) {
    const auto n = static_cast<Eigen::Index>(mats.farm_count);
    const auto m = static_cast<Eigen::Index>(mats.interior_count);
    if (mats.b_full.rows() != n + m || mats.b_full.cols() != n + m ||
        mats.capacity_pu.size() != n) {
        throw InputError("kron_reduce: inconsistent matrix dimensions");
    }

    KronReducedNetwork out;
    out.farm_ids.assign(mats.node_ids.begin(), mats.node_ids.begin() + n);
    out.s_b = mats.capacity_pu;

    if (m == 0) {
        out.b_r = mats.b_full;
        return out;
    }

    const Eigen::MatrixXd b4 = mats.b_full.bottomRightCorner(m, m);
    const Eigen::LLT<Eigen::MatrixXd> llt(b4);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond)) {
        std::vector<std::string> interior(mats.node_ids.begin() + n, mats.node_ids.end());
        throw NumericalError("kron_reduce: interior block is numerically singular "
                             "(condition estimate above 1e12); interior nodes: " +
                             join_ids(interior));
    }
    const Eigen::MatrixXd b3 = mats.b_full.bottomLeftCorner(m, n);
    const Eigen::MatrixXd b_r = mats.b_full.topLeftCorner(n, n) -
                                mats.b_full.topRightCorner(n, m) * llt.solve(b3);
    out.b_r = 0.5 * (b_r + b_r.transpose());
    return out;
}

Eigen::VectorXd GfmAttachment::gamma_vector(std::size_t farm_count) const {
    const auto n = static_cast<Eigen::Index>(farm_count);
    if (const double* uniform = std::get_if<double>(&gamma)) {
        return Eigen::VectorXd::Constant(n, *uniform);
    }
    const auto& per_farm = std::get<Eigen::VectorXd>(gamma);
    if (per_farm.size() != n) {
        throw InputError("gamma vector has " + std::to_string(per_farm.size()) +
                         " entries but the network has " + std::to_string(farm_count) +
                         " wind farms");
    }
    return per_farm;
}

void GfmAttachment::validate() const {
    if (!std::isfinite(z_local) || z_local <= 0.0) {
        throw InputError("z_local must be positive, got " + text::format_exact(z_local));
    }
    auto check = [](double g) {
        if (!std::isfinite(g) || g < 0.0) {
            throw InputError("gamma must be non-negative, got " + text::format_exact(g));
        }
    };
    if (const double* uniform = std::get_if<double>(&gamma)) {
        check(*uniform);
    } else {
        for (double g : std::get<Eigen::VectorXd>(gamma)) {
            check(g);
        }
    }
}

KronReducedNetwork attach_gfm(const KronReducedNetwork& reduced, const GfmAttachment& att) {
    att.validate();
    const Eigen::VectorXd gamma = att.gamma_vector(reduced.size());
    KronReducedNetwork out = reduced;
    const double y_local = att.y_local();
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
        if (gamma(i) != 0.0) {
            out.b_r(i, i) += reduced.s_b(i) * gamma(i) * y_local;
        }
    }
    return out;
}

}  // namespace gridstrength::network
