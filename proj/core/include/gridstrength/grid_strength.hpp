#pragma once

#include "gridstrength/network_model.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gridstrength::strength {

// Spectrum of S_B^{-1} B_r. Eigenvalues ascending; eigenvectors are the
// columns of `vectors`, unit length, first nonzero entry positive.
struct ModalDecomposition {
    Eigen::VectorXd lambdas;
    Eigen::MatrixXd vectors;
    std::vector<std::string> farm_ids;

    double gscr() const { return lambdas(0); }
    std::size_t size() const { return static_cast<std::size_t>(lambdas.size()); }
};

// Solved through the symmetric similarity S_B^{-1/2} B_r S_B^{-1/2}, so the
// spectrum is real by construction. Throws NumericalError when b_r is not
// symmetric to 1e-12 * max|b_r| or not positive definite.
ModalDecomposition compute_modes(const network::KronReducedNetwork& reduced);

// Generalized short-circuit ratio: the smallest eigenvalue of S_B^{-1} B_r.
double gscr(const network::KronReducedNetwork& reduced);

// gSCR after uniform GFM attachment: gscr0 + gamma / z_local.
double predict_gscr(double gscr0, double gamma, double z_local);

struct GammaSizing {
    double gamma = 0.0;
    bool already_satisfied = false;  // target <= gscr0, no GFM capacity needed
};

// Inverse of predict_gscr, clamped at zero.
GammaSizing size_gamma(double gscr0, double target_gscr, double z_local);

// Converts a device-terminal SCR requirement into the transmission-level gSCR
// by removing the series reactance between them: 1 / (1/scr - z_series).
double terminal_scr_to_gscr(double scr_terminal, double z_series);

struct UnitPlan {
    std::vector<long long> counts;         // GFM units per farm
    std::vector<double> realized_gamma;    // counts * unit / capacity
    double min_realized_gamma = 0.0;
    std::optional<double> predicted_gscr;  // predict_gscr(gscr0, min realized gamma)
};

// Rounds each farm's GFM capacity up to whole units of `unit_mva`.
UnitPlan plan_gfm_units(std::span<const double> farm_capacities_mva, double gamma, double unit_mva);
UnitPlan plan_gfm_units(std::span<const double> farm_capacities_mva, double gamma, double unit_mva,
                        double gscr0, double z_local);

struct SizingResult {
    double gscr0 = 0.0;
    double target_gscr = 0.0;
    double z_local = 0.0;
    double gamma_required = 0.0;
    bool already_satisfied = false;
    std::vector<std::string> farm_ids;
    std::vector<double> gfm_capacity_mva;  // gamma_required * S_i
    double verified_gscr = 0.0;            // numerical re-solve with gamma_required
    std::optional<UnitPlan> units;
    std::optional<double> verified_gscr_with_units;  // re-solve with per-farm realized gamma
};

// Sizes uniform GFM capacity for a network and verifies the result by
// re-solving the augmented eigenproblem.
SizingResult size_network(const network::KronReducedNetwork& reduced,
                          std::span<const double> farm_capacities_mva, double target_gscr,
                          double z_local, std::optional<double> unit_mva = std::nullopt);

}  // namespace gridstrength::strength
