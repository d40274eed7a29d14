#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gridstrength::network {

enum class NodeKind { WindFarm, Interior, InfiniteBus };

std::string_view to_string(NodeKind kind);

struct Node {
    std::string id;
    NodeKind kind = NodeKind::Interior;
    double capacity_mva = 0.0;  // wind farms only
};

// Undirected susceptive branch, per unit on the global base.
struct Branch {
    std::string from;
    std::string to;
    double b_pu = 0.0;
};

// Declarative network description. Instances obtained from make_network_spec()
// or parse_network() satisfy every structural invariant:
//   * at least one wind farm and one infinite bus,
//   * strictly positive, finite susceptances and farm capacities,
//   * no self-branches, no unknown node references, parallel branches merged,
//   * every farm/interior node reaches an infinite bus.
class NetworkSpec {
public:
    NetworkSpec() = default;

    double s_global_mva() const { return s_global_mva_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Branch>& branches() const { return branches_; }

    // Wind farms in file order, then interior nodes in file order.
    const std::vector<std::string>& farm_ids() const { return farm_ids_; }
    const std::vector<std::string>& interior_ids() const { return interior_ids_; }
    std::size_t farm_count() const { return farm_ids_.size(); }
    std::size_t interior_count() const { return interior_ids_.size(); }
    std::size_t infinite_bus_count() const;

    // Farm capacities (MVA) in farm order.
    std::vector<double> farm_capacities_mva() const;

    friend NetworkSpec make_network_spec(double s_global_mva, std::vector<Node> nodes,
                                         std::vector<Branch> branches);

private:
    double s_global_mva_ = 0.0;
    std::vector<Node> nodes_;
    std::vector<Branch> branches_;
    std::vector<std::string> farm_ids_;
    std::vector<std::string> interior_ids_;
};

// Validates and normalizes a raw description. Throws InputError with the
// offending node/branch identity.
NetworkSpec make_network_spec(double s_global_mva, std::vector<Node> nodes,
                              std::vector<Branch> branches);

// YAML network document; see docs/schema.md.
NetworkSpec parse_network(std::string_view text);
NetworkSpec load_network(const std::filesystem::path& path);

struct SusceptanceMatrices {
    // (n+m)x(n+m) grounded Laplacian: off-diagonals -b_ij, diagonals sum all
    // incident susceptances including links to infinite buses.
    Eigen::MatrixXd b_full;
    // Total susceptance from each node to the infinite buses.
    Eigen::VectorXd ground_links;
    std::vector<std::string> node_ids;  // farms first, then interior
    std::size_t farm_count = 0;
    std::size_t interior_count = 0;
    // S_i / S_global per farm.
    Eigen::VectorXd capacity_pu;
};

SusceptanceMatrices build_susceptance(const NetworkSpec& spec);

struct KronReducedNetwork {
    Eigen::MatrixXd b_r;             // n x n, per unit on s_global
    Eigen::VectorXd s_b;             // diagonal of the capacity matrix
    std::vector<std::string> farm_ids;

    std::size_t size() const { return static_cast<std::size_t>(b_r.rows()); }
};

// Eliminates interior nodes: b_r = B1 - B2 B4^{-1} B3. When there are no
// interior nodes the farm block is copied verbatim.
KronReducedNetwork kron_reduce(const SusceptanceMatrices& mats);

// GFM capacity attached at each farm as a ratio of the farm capacity. The
// converter is an ideal source behind z_local (per unit on its own base).
struct GfmAttachment {
    std::variant<double, Eigen::VectorXd> gamma = 0.0;
    double z_local = 0.16;

    double y_local() const { return 1.0 / z_local; }
    bool is_uniform() const { return std::holds_alternative<double>(gamma); }
    Eigen::VectorXd gamma_vector(std::size_t farm_count) const;
    void validate() const;
};

// Adds the branch S_Bii * gamma_i * y_local from each farm to ground.
KronReducedNetwork attach_gfm(const KronReducedNetwork& reduced, const GfmAttachment& att);

}  // namespace gridstrength::network
