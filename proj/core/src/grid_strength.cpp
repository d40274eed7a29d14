#include "gridstrength/grid_strength.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gridstrength::strength {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-8;
// Guards ceil() against representation noise such as 0.128 * 100 / 12.8.
constexpr double kUnitRoundingSlack = 1e-12;

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw InputError(std::string(name) + " must be positive, got " + text::format_exact(value));
    }
}

}  // namespace

ModalDecomposition compute_modes(const network::KronReducedNetwork& reduced) {
    const Eigen::MatrixXd& b = reduced.b_r;
    const Eigen::Index n = b.rows();
    if (n == 0 || b.cols() != n || reduced.s_b.size() != n) {
        throw InputError("compute_modes: inconsistent reduced network dimensions");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(reduced.s_b(i) > 0.0) || !std::isfinite(reduced.s_b(i))) {
            throw InputError("compute_modes: capacity ratio of farm '" + reduced.farm_ids.at(i) +
                             "' must be positive");
        }
    }
    const double scale = b.cwiseAbs().maxCoeff();
    const double asymmetry = (b - b.transpose()).cwiseAbs().maxCoeff();
    if (!(asymmetry <= kSymmetryTolerance * scale)) {
        throw NumericalError("compute_modes: reduced susceptance matrix is not symmetric "
                             "(max asymmetry " + text::format_exact(asymmetry) + ")");
    }

    const Eigen::VectorXd inv_sqrt = reduced.s_b.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd sym = inv_sqrt.asDiagonal() * (0.5 * (b + b.transpose())) *
                                inv_sqrt.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("compute_modes: symmetric eigensolver did not converge");
    }

    ModalDecomposition modes;
    modes.farm_ids = reduced.farm_ids;
    modes.lambdas = solver.eigenvalues();  // ascending
    if (!(modes.lambdas(0) > 0.0)) {
        throw NumericalError("compute_modes: reduced susceptance matrix is not positive definite "
                             "(smallest eigenvalue " + text::format_exact(modes.lambdas(0)) + ")");
    }

    // Right eigenvectors of S_B^{-1} B_r are S_B^{-1/2} w.
    modes.vectors = inv_sqrt.asDiagonal() * solver.eigenvectors();
    const Eigen::MatrixXd op = reduced.s_b.cwiseInverse().asDiagonal() * b;
    for (Eigen::Index k = 0; k < n; ++k) {
        auto v = modes.vectors.col(k);
        v.normalize();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (v(i) != 0.0) {
                if (v(i) < 0.0) {
                    v = -v;
                }
                break;
            }
        }
        const double residual = (op * v - modes.lambdas(k) * v).norm();
        if (residual > kResidualTolerance * std::max(1.0, modes.lambdas(k))) {
            throw NumericalError("compute_modes: eigenpair residual " + text::format_exact(residual) +
                                 " exceeds tolerance for mode " + std::to_string(k));
        }
    }
    return modes;
}

double gscr(const network::KronReducedNetwork& reduced) {
    return compute_modes(reduced).gscr();
}

double predict_gscr(double gscr0, double gamma, double z_local) {
    require_positive(z_local, "z_local");
    require_positive(gscr0, "gscr0");
    if (!std::isfinite(gamma) || gamma < 0.0) {
        throw InputError("gamma must be non-negative, got " + text::format_exact(gamma));
    }
    return gscr0 + gamma / z_local;
}

GammaSizing size_gamma(double gscr0, double target_gscr, double z_local) {
    require_positive(z_local, "z_local");
    require_positive(gscr0, "gscr0");
    require_positive(target_gscr, "target gSCR");
    if (target_gscr <= gscr0) {
        return {0.0, true};
    }
    return {(target_gscr - gscr0) * z_local, false};
}

double terminal_scr_to_gscr(double scr_terminal, double z_series) {
    require_positive(scr_terminal, "terminal SCR");
    if (!std::isfinite(z_series) || z_series < 0.0) {
        throw InputError("series reactance must be non-negative, got " + text::format_exact(z_series));
    }
    const double grid_side = 1.0 / scr_terminal - z_series;
    if (!(grid_side > 0.0)) {
        throw InputError("series reactance " + text::format_exact(z_series) +
                         " is not smaller than 1/SCR = " + text::format_exact(1.0 / scr_terminal) +
                         "; the transmission-level strength is unbounded");
    }
    return 1.0 / grid_side;
}

UnitPlan plan_gfm_units(std::span<const double> farm_capacities_mva, double gamma, double unit_mva) {
    require_positive(unit_mva, "unit size");
    if (!std::isfinite(gamma) || gamma < 0.0) {
        throw InputError("gamma must be non-negative, got " + text::format_exact(gamma));
    }
    UnitPlan plan;
    plan.min_realized_gamma = farm_capacities_mva.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (double capacity : farm_capacities_mva) {
        require_positive(capacity, "farm capacity");
        const double exact = gamma * capacity / unit_mva;
        const auto count = static_cast<long long>(std::ceil(exact * (1.0 - kUnitRoundingSlack)));
        const double realized = static_cast<double>(count) * unit_mva / capacity;
        plan.counts.push_back(count);
        plan.realized_gamma.push_back(realized);
        plan.min_realized_gamma = std::min(plan.min_realized_gamma, realized);
    }
    return plan;
}

UnitPlan plan_gfm_units(std::span<const double> farm_capacities_mva, double gamma, double unit_mva,
                        double gscr0, double z_local) {
    UnitPlan plan = plan_gfm_units(farm_capacities_mva, gamma, unit_mva);
    plan.predicted_gscr = predict_gscr(gscr0, plan.min_realized_gamma, z_local);
    return plan;
}

SizingResult size_network(const network::KronReducedNetwork& reduced,
                          std::span<const double> farm_capacities_mva, double target_gscr,
                          double z_local, std::optional<double> unit_mva) {
    if (farm_capacities_mva.size() != reduced.size()) {
        throw InputError("size_network: capacity list does not match the farm count");
    }
    SizingResult result;
    result.gscr0 = gscr(reduced);
    result.target_gscr = target_gscr;
    result.z_local = z_local;
    const GammaSizing sizing = size_gamma(result.gscr0, target_gscr, z_local);
    result.gamma_required = sizing.gamma;
    result.already_satisfied = sizing.already_satisfied;
    result.farm_ids = reduced.farm_ids;
    for (double capacity : farm_capacities_mva) {
        result.gfm_capacity_mva.push_back(sizing.gamma * capacity);
    }
    result.verified_gscr = gscr(network::attach_gfm(reduced, {sizing.gamma, z_local}));

    if (unit_mva) {
        UnitPlan plan = plan_gfm_units(farm_capacities_mva, sizing.gamma, *unit_mva, result.gscr0,
                                       z_local);
        const Eigen::Map<const Eigen::VectorXd> realized(plan.realized_gamma.data(),
                                                         static_cast<Eigen::Index>(plan.realized_gamma.size()));
        result.verified_gscr_with_units =
            gscr(network::attach_gfm(reduced, {Eigen::VectorXd(realized), z_local}));
        result.units = std::move(plan);
    }
    return result;
}

}  // namespace gridstrength::strength
