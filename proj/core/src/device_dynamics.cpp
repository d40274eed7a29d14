#include "gridstrength/device_dynamics.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace gridstrength::dynamics {

namespace {

constexpr double kSingularElimination = 1e-12;
constexpr double kCgscrAbscissaTolerance = 1e-8;
constexpr double kCgscrWidthTolerance = 1e-9;
constexpr int kCgscrMaxIterations = 200;
constexpr int kMonotonicityProbes = 16;
// Allowed disagreement between the eigenvalue verdict and gSCR - CgSCR.
constexpr double kCriterionBand = 1e-6;

constexpr std::array<const char*, kStatesPerDevice> kStateNames = {"pll_angle", "pll_integrator",
                                                                   "i_d", "i_q"};
constexpr std::array<const char*, 2> kInputNames = {"i_d_setpoint", "i_q_setpoint"};

Eigen::Index state_index(Eigen::Index device, DeviceState s) {
    return kStatesPerDevice * device + static_cast<Eigen::Index>(s);
}

void require_positive(double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw InputError(std::string(name) + " must be positive, got " + text::format_exact(value));
    }
}

void fill_labels(StateSpaceModel& model, const std::vector<std::string>& ids) {
    model.device_ids = ids;
    for (const auto& id : ids) {
        for (const char* s : kStateNames) {
            model.state_labels.push_back(id + "." + s);
        }
        for (const char* in : kInputNames) {
            model.input_labels.push_back(id + "." + in);
        }
        model.output_labels.push_back(id + ".dP");
    }
}

double pll_denominator(const GflDeviceParams& dev, double reactance, double i_d) {
    const double kappa = 1.0 - dev.pll_kp * reactance * i_d;
    if (std::abs(kappa) < kSingularElimination) {
        throw NumericalError("PLL frequency coupling makes the terminal-voltage elimination "
                             "singular at X = " + text::format_exact(reactance));
    }
    return kappa;
}

}  // namespace

double GflDeviceParams::base_omega() const {
    return 2.0 * std::numbers::pi * base_freq_hz;
}

void GflDeviceParams::validate() const {
    require_positive(pll_kp, "pll_kp");
    require_positive(pll_ki, "pll_ki");
    require_positive(current_loop_tau_s, "current_loop_tau_s");
    require_positive(v_terminal_pu, "v_terminal_pu");
    require_positive(base_freq_hz, "base_freq_hz");
    if (!std::isfinite(p_set_pu) || !std::isfinite(q_set_pu)) {
        throw InputError("p_set_pu and q_set_pu must be finite");
    }
}

void StateSpaceModel::validate() const {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || b.rows() != n || c.cols() != n || d.rows() != c.rows() ||
        d.cols() != b.cols()) {
        throw NumericalError("state-space model has inconsistent dimensions");
    }
    if (state_labels.size() != static_cast<std::size_t>(n) ||
        input_labels.size() != static_cast<std::size_t>(b.cols()) ||
        output_labels.size() != static_cast<std::size_t>(c.rows())) {
        throw NumericalError("state-space model labels do not match its dimensions");
    }
    auto sorted = state_labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw NumericalError("state-space model has duplicate state labels");
    }
    if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite()) {
        throw NumericalError("state-space model contains non-finite entries");
    }
}

OperatingPoint operating_point(const GflDeviceParams& dev, double scr) {
    dev.validate();
    require_positive(scr, "SCR");
    OperatingPoint op;
    op.grid_reactance = 1.0 / scr;
    op.v_terminal = dev.v_terminal_pu;
    op.i_d = dev.p_set_pu / dev.v_terminal_pu;
    op.i_q = -dev.q_set_pu / dev.v_terminal_pu;
    // E e^{-j theta0} = v - j X i
    const double e_d = op.v_terminal + op.grid_reactance * op.i_q;
    const double e_q = -op.grid_reactance * op.i_d;
    if (!(e_d > 0.0)) {
        throw InputError("operating point infeasible at this SCR (" + text::format_exact(scr) +
                         "): source angle at or beyond 90 degrees");
    }
    op.source_voltage = std::hypot(e_d, e_q);
    op.source_angle = std::atan2(-e_q, e_d);
    return op;
}

StateSpaceModel build_smib_model(const GflDeviceParams& dev, double scr) {
    const OperatingPoint op = operating_point(dev, scr);
    const double x = op.grid_reactance;
    const double wb = dev.base_omega();
    const double tau = dev.current_loop_tau_s;
    const double kp = dev.pll_kp;
    const double ki = dev.pll_ki;
    const double kappa = pll_denominator(dev, x, op.i_d);
    // |E| cos(theta0) and the inductive drop of a current-rate change.
    const double e_cos = op.v_terminal + x * op.i_q;
    const double rate = x / (wb * tau);
    const double coupling = x * op.i_d / wb;  // d v_q / d theta'

    StateSpaceModel m;
    m.a = Eigen::MatrixXd::Zero(4, 4);
    m.b = Eigen::MatrixXd::Zero(4, 2);
    m.c = Eigen::MatrixXd::Zero(1, 4);
    m.d = Eigen::MatrixXd::Zero(1, 2);

    // v_q before the PLL-frequency term: -e_cos*theta + X*i_d + rate*(u_q - i_q)
    const Eigen::RowVector4d q0_x(-e_cos, 0.0, x, -rate);
    const Eigen::RowVector2d q0_u(0.0, rate);

    // theta' = wb (kp q0 + ki zeta) / kappa
    Eigen::RowVector4d theta_x = (wb / kappa) * kp * q0_x;
    theta_x(1) += wb * ki / kappa;
    const Eigen::RowVector2d theta_u = (wb / kappa) * kp * q0_u;

    m.a.row(0) = theta_x;
    m.b.row(0) = theta_u;
    m.a.row(1) = q0_x + coupling * theta_x;  // zeta' = v_q
    m.b.row(1) = q0_u + coupling * theta_u;
    m.a(2, 2) = -1.0 / tau;
    m.a(3, 3) = -1.0 / tau;
    m.b(2, 0) = 1.0 / tau;
    m.b(3, 1) = 1.0 / tau;

    // dv_d = -X i_d theta - X i_q + rate (u_d - i_d) - (X i_q0 / wb) theta'
    Eigen::RowVector4d vd_x(-x * op.i_d, 0.0, -rate, -x);
    Eigen::RowVector2d vd_u(rate, 0.0);
    vd_x -= (x * op.i_q / wb) * theta_x;
    vd_u -= (x * op.i_q / wb) * theta_u;
    const Eigen::RowVector4d vq_x = m.a.row(1);
    const Eigen::RowVector2d vq_u = m.b.row(1);

    // dP = i_d dv_d + v dI_d + i_q dv_q
    m.c.row(0) = op.i_d * vd_x + op.i_q * vq_x;
    m.c(0, 2) += op.v_terminal;
    m.d.row(0) = op.i_d * vd_u + op.i_q * vq_u;

    fill_labels(m, {"device"});
    m.validate();
    return m;
}

Eigen::Vector4d smib_derivative(const GflDeviceParams& dev, double scr, const Eigen::Vector4d& x,
                                const Eigen::Vector2d& u) {
    const OperatingPoint op = operating_point(dev, scr);
    const double reactance = op.grid_reactance;
    const double wb = dev.base_omega();
    const double tau = dev.current_loop_tau_s;
    const double theta = x(0), zeta = x(1), i_d = x(2), i_q = x(3);

    const double di_d = (u(0) - i_d) / tau;
    const double di_q = (u(1) - i_q) / tau;
    const double q0 = -op.source_voltage * std::sin(theta) + reactance * i_d + reactance / wb * di_q;
    const double kappa = pll_denominator(dev, reactance, i_d);
    const double dtheta = wb * (dev.pll_kp * q0 + dev.pll_ki * zeta) / kappa;
    const double v_q = q0 + reactance / wb * i_d * dtheta;
    return {dtheta, v_q, di_d, di_q};
}

double smib_active_power(const GflDeviceParams& dev, double scr, const Eigen::Vector4d& x,
                         const Eigen::Vector2d& u) {
    const OperatingPoint op = operating_point(dev, scr);
    const double reactance = op.grid_reactance;
    const double wb = dev.base_omega();
    const Eigen::Vector4d dx = smib_derivative(dev, scr, x, u);
    const double theta = x(0), i_d = x(2), i_q = x(3);
    const double v_d = op.source_voltage * std::cos(theta) - reactance * i_q +
                       reactance / wb * (dx(2) - dx(0) * i_q);
    const double v_q = dx(1);
    return v_d * i_d + v_q * i_q;
}

std::pair<Eigen::Vector4d, Eigen::Vector2d> smib_equilibrium(const GflDeviceParams& dev, double scr) {
    const OperatingPoint op = operating_point(dev, scr);
    return {Eigen::Vector4d(op.source_angle, 0.0, op.i_d, op.i_q), Eigen::Vector2d(op.i_d, op.i_q)};
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) {
        return {};
    }
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalue solver did not converge");
    }
    const Eigen::VectorXcd& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
    const auto ev = eigenvalues(a);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& e : ev) {
        best = std::max(best, e.real());
    }
    return best;
}

CgscrResult compute_cgscr(const GflDeviceParams& dev, ScrBracket bracket) {
    dev.validate();
    require_positive(bracket.lo, "bracket lower bound");
    if (!(bracket.hi > bracket.lo) || !std::isfinite(bracket.hi)) {
        throw InputError("bracket upper bound must exceed the lower bound");
    }
    auto abscissa = [&](double scr) { return spectral_abscissa(build_smib_model(dev, scr).a); };

    const double f_lo = abscissa(bracket.lo);
    const double f_hi = abscissa(bracket.hi);
    if (!(f_lo > 0.0) || !(f_hi < 0.0)) {
        const bool stable_everywhere = f_lo < 0.0 && f_hi < 0.0;
        const bool unstable_everywhere = f_lo > 0.0 && f_hi > 0.0;
        const std::string what = stable_everywhere     ? "stable"
                                 : unstable_everywhere ? "unstable"
                                                       : "stable (or unstable)";
        throw BracketError("device " + what + " over entire bracket; CgSCR outside [" +
                           text::format_exact(bracket.lo) + ", " + text::format_exact(bracket.hi) +
                           "]");
    }

    CgscrResult result;
    result.bracket = bracket;

    int sign_changes = 0;
    bool previous_unstable = true;
    for (int k = 1; k <= kMonotonicityProbes; ++k) {
        const double scr = bracket.lo + (bracket.hi - bracket.lo) * k / (kMonotonicityProbes + 1);
        const bool unstable = abscissa(scr) > 0.0;
        if (unstable != previous_unstable) {
            ++sign_changes;
        }
        previous_unstable = unstable;
    }
    if (previous_unstable) {
        ++sign_changes;  // the final probe to bracket.hi flips as well
    }
    result.non_monotone = sign_changes > 1;

    double lo = bracket.lo;
    double hi = bracket.hi;
    double mid = 0.5 * (lo + hi);
    double f_mid = 0.0;
    for (int it = 0; it < kCgscrMaxIterations; ++it) {
        mid = 0.5 * (lo + hi);
        f_mid = abscissa(mid);
        result.iterations = it + 1;
        if (std::abs(f_mid) < kCgscrAbscissaTolerance || hi - lo < kCgscrWidthTolerance) {
            break;
        }
        if (f_mid > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    result.cgscr = mid;
    result.max_real_part = f_mid;

    const auto ev = eigenvalues(build_smib_model(dev, mid).a);
    auto critical = *std::max_element(ev.begin(), ev.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) {
            return x.real() < y.real();
        }
        return x.imag() < y.imag();
    });
    result.critical_eigenvalue = {critical.real(), std::abs(critical.imag())};
    return result;
}

std::vector<std::complex<double>> modal_eigenvalues(const GflDeviceParams& dev,
                                                    const strength::ModalDecomposition& modes) {
    std::vector<std::complex<double>> out;
    out.reserve(modes.size() * kStatesPerDevice);
    for (Eigen::Index k = 0; k < modes.lambdas.size(); ++k) {
        const double lambda = modes.lambdas(k);
        try {
            const auto ev = eigenvalues(build_smib_model(dev, lambda).a);
            out.insert(out.end(), ev.begin(), ev.end());
        } catch (const InputError& e) {
            throw InputError("mode " + std::to_string(k) + " (lambda = " + text::format_exact(lambda) +
                             "): " + e.what());
        } catch (const NumericalError& e) {
            throw NumericalError("mode " + std::to_string(k) +
                                 " (lambda = " + text::format_exact(lambda) + "): " + e.what());
        }
    }
    return out;
}

StateSpaceModel direct_full_model(const GflDeviceParams& dev,
                                  const network::KronReducedNetwork& reduced) {
    dev.validate();
    const Eigen::Index n = reduced.b_r.rows();
    const Eigen::Index states = kStatesPerDevice * n;
    if (n == 0 || reduced.s_b.size() != n) {
        throw InputError("direct_full_model: inconsistent reduced network");
    }

    // Terminal voltages respond to injected currents (device bases) through
    // M = B_r^{-1} S_B.
    const Eigen::LLT<Eigen::MatrixXd> llt(reduced.b_r);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("direct_full_model: reduced susceptance matrix is not positive definite");
    }
    const Eigen::MatrixXd coupling = llt.solve(Eigen::MatrixXd(reduced.s_b.asDiagonal()));

    const double wb = dev.base_omega();
    const double tau = dev.current_loop_tau_s;
    const double v0 = dev.v_terminal_pu;
    const double i_d0 = dev.p_set_pu / v0;
    const double i_q0 = -dev.q_set_pu / v0;

    // Current loops: di/dt = current_x * x + current_u * u
    Eigen::MatrixXd current_x = Eigen::MatrixXd::Zero(2 * n, states);
    Eigen::MatrixXd current_u = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        current_x(2 * k, state_index(k, DeviceState::CurrentD)) = -1.0 / tau;
        current_x(2 * k + 1, state_index(k, DeviceState::CurrentQ)) = -1.0 / tau;
        current_u(2 * k, 2 * k) = 1.0 / tau;
        current_u(2 * k + 1, 2 * k + 1) = 1.0 / tau;
    }

    // Terminal voltages in each PLL frame (d, q interleaved):
    //   dv = volt_x x + volt_u u + volt_w theta'
    // from dv_k = -j v0 dtheta_k
    //           + sum_l M_kl [ j (di_l + j i0 dtheta_l) + (di_l/dt + j i0 dtheta_l') / wb ]
    Eigen::MatrixXd volt_x = Eigen::MatrixXd::Zero(2 * n, states);
    Eigen::MatrixXd volt_u = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::MatrixXd volt_w = Eigen::MatrixXd::Zero(2 * n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        volt_x(2 * k + 1, state_index(k, DeviceState::PllAngle)) -= v0;
        for (Eigen::Index l = 0; l < n; ++l) {
            const double m = coupling(k, l);
            volt_x(2 * k, state_index(l, DeviceState::PllAngle)) -= m * i_d0;
            volt_x(2 * k + 1, state_index(l, DeviceState::PllAngle)) -= m * i_q0;
            volt_x(2 * k, state_index(l, DeviceState::CurrentQ)) -= m;
            volt_x(2 * k + 1, state_index(l, DeviceState::CurrentD)) += m;
            volt_x.middleRows(2 * k, 2) += (m / wb) * current_x.middleRows(2 * l, 2);
            volt_u.middleRows(2 * k, 2) += (m / wb) * current_u.middleRows(2 * l, 2);
            volt_w(2 * k, l) -= m * i_q0 / wb;
            volt_w(2 * k + 1, l) += m * i_d0 / wb;
        }
    }

    Eigen::MatrixXd vq_x(n, states), vq_u(n, 2 * n), vq_w(n, n);
    Eigen::MatrixXd integrator = Eigen::MatrixXd::Zero(n, states);
    for (Eigen::Index k = 0; k < n; ++k) {
        vq_x.row(k) = volt_x.row(2 * k + 1);
        vq_u.row(k) = volt_u.row(2 * k + 1);
        vq_w.row(k) = volt_w.row(2 * k + 1);
        integrator(k, state_index(k, DeviceState::PllIntegrator)) = 1.0;
    }

    // theta' = wb (kp v_q + ki zeta) with v_q itself depending on theta':
    // (I - wb kp vq_w) theta' = wb (kp vq_x + ki Z) x + wb kp vq_u u
    const Eigen::MatrixXd elimination =
        Eigen::MatrixXd::Identity(n, n) - wb * dev.pll_kp * vq_w;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(elimination);
    if (!(lu.rcond() > kSingularElimination)) {
        throw NumericalError("direct_full_model: singular terminal-voltage elimination");
    }
    const Eigen::MatrixXd w_x = lu.solve(wb * (dev.pll_kp * vq_x + dev.pll_ki * integrator));
    const Eigen::MatrixXd w_u = lu.solve(wb * dev.pll_kp * vq_u);

    StateSpaceModel model;
    model.a = Eigen::MatrixXd::Zero(states, states);
    model.b = Eigen::MatrixXd::Zero(states, 2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index theta = state_index(k, DeviceState::PllAngle);
        const Eigen::Index zeta = state_index(k, DeviceState::PllIntegrator);
        model.a.row(theta) = w_x.row(k);
        model.b.row(theta) = w_u.row(k);
        model.a.row(zeta) = vq_x.row(k) + vq_w.row(k) * w_x;
        model.b.row(zeta) = vq_u.row(k) + vq_w.row(k) * w_u;
        model.a.middleRows(state_index(k, DeviceState::CurrentD), 2) = current_x.middleRows(2 * k, 2);
        model.b.middleRows(state_index(k, DeviceState::CurrentD), 2) = current_u.middleRows(2 * k, 2);
    }

    const Eigen::MatrixXd v_x = volt_x + volt_w * w_x;
    const Eigen::MatrixXd v_u = volt_u + volt_w * w_u;
    model.c = Eigen::MatrixXd::Zero(n, states);
    model.d = Eigen::MatrixXd::Zero(n, 2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        model.c.row(k) = i_d0 * v_x.row(2 * k) + i_q0 * v_x.row(2 * k + 1);
        model.c(k, state_index(k, DeviceState::CurrentD)) += v0;
        model.d.row(k) = i_d0 * v_u.row(2 * k) + i_q0 * v_u.row(2 * k + 1);
    }

    fill_labels(model, reduced.farm_ids);
    model.validate();
    return model;
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
    case Verdict::Stable:
        return "stable";
    case Verdict::Unstable:
        return "unstable";
    case Verdict::Marginal:
        return "marginal";
    }
    return "unknown";
}

Verdict verdict_from_abscissa(double max_real_part) {
    if (max_real_part < -kStabilityEpsilon) {
        return Verdict::Stable;
    }
    if (max_real_part > kStabilityEpsilon) {
        return Verdict::Unstable;
    }
    return Verdict::Marginal;
}

double damping_ratio(std::complex<double> eigenvalue) {
    const double magnitude = std::abs(eigenvalue);
    return magnitude == 0.0 ? 0.0 : -eigenvalue.real() / magnitude;
}

StabilityAssessment assess(const network::NetworkSpec& spec, const GflDeviceParams& dev,
                           const network::GfmAttachment& att, ScrBracket bracket) {
    dev.validate();
    const auto reduced = network::kron_reduce(network::build_susceptance(spec));
    const auto augmented = network::attach_gfm(reduced, att);

    StabilityAssessment out;
    out.gscr0 = strength::gscr(reduced);
    out.modes = strength::compute_modes(augmented);
    out.gscr = out.modes.gscr();
    out.critical = compute_cgscr(dev, bracket);
    out.cgscr = out.critical.cgscr;
    out.margin = out.gscr - out.cgscr;

    out.eigenvalues = modal_eigenvalues(dev, out.modes);
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) {
            return x.real() > y.real();
        }
        return x.imag() > y.imag();
    });
    for (const auto& e : out.eigenvalues) {
        out.damping_ratios.push_back(damping_ratio(e));
    }
    out.max_real_part = out.eigenvalues.front().real();
    out.verdict = verdict_from_abscissa(out.max_real_part);

    const bool contradicts = (out.verdict == Verdict::Stable && out.margin < -kCriterionBand) ||
                             (out.verdict == Verdict::Unstable && out.margin > kCriterionBand);
    if (contradicts) {
        throw ConsistencyError("eigenvalue verdict '" + std::string(to_string(out.verdict)) +
                               "' contradicts gSCR - CgSCR = " + text::format_exact(out.margin));
    }
    return out;
}

}  // namespace gridstrength::dynamics
