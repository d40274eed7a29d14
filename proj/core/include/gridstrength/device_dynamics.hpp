#pragma once

#include "gridstrength/grid_strength.hpp"
#include "gridstrength/network_model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridstrength::dynamics {

/// Small-signal parameters of a grid-following converter, per unit on the
/// device's own base.
///
/// The device has four states: PLL angle, PLL integrator, and the d/q
/// currents in the PLL frame. Currents track constant setpoints
/// (p_set/v, -q_set/v) with a first-order lag; the PLL drives the q-axis
/// terminal voltage to zero through a PI controller scaled by base_omega.
struct GflDeviceParams {
    double pll_kp = 0.0;
    double pll_ki = 0.0;
    double current_loop_tau_s = 0.0;
    double p_set_pu = 1.0;
    double q_set_pu = 0.0;
    double v_terminal_pu = 1.0;  // rated terminal voltage at the operating point
    double base_freq_hz = 50.0;

    double base_omega() const;
    void validate() const;
};

// YAML device document; see docs/schema.md.
GflDeviceParams parse_device(std::string_view text);
GflDeviceParams load_device(const std::filesystem::path& path);

// Operating point of a device behind grid reactance 1/scr. Every device is
// linearized at its rated terminal point; the source phasor behind the
// reactance follows from v = E e^{-j theta0} + j X i.
struct OperatingPoint {
    double grid_reactance = 0.0;  // X = 1/scr
    double v_terminal = 0.0;      // on the PLL d-axis, v_q = 0
    double i_d = 0.0;
    double i_q = 0.0;
    double source_voltage = 0.0;  // |E|
    double source_angle = 0.0;    // theta0 (rad), terminal leads source
};

// Throws InputError("operating point infeasible at this SCR") when the source
// angle reaches 90 degrees (beyond the static transfer limit).
OperatingPoint operating_point(const GflDeviceParams& dev, double scr);

struct StateSpaceModel {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;  // inputs: per device (i_d setpoint, i_q setpoint)
    Eigen::MatrixXd c;  // outputs: per device active-power deviation
    Eigen::MatrixXd d;
    std::vector<std::string> state_labels;
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    std::vector<std::string> device_ids;

    std::size_t state_count() const { return static_cast<std::size_t>(a.rows()); }
    void validate() const;
};

inline constexpr int kStatesPerDevice = 4;
enum class DeviceState { PllAngle = 0, PllIntegrator = 1, CurrentD = 2, CurrentQ = 3 };
enum class DeviceInput { CurrentDSetpoint = 0, CurrentQSetpoint = 1 };

// Linearized single-device-infinite-bus model with X = 1/scr.
StateSpaceModel build_smib_model(const GflDeviceParams& dev, double scr);

// Nonlinear SMIB right-hand side in absolute quantities, state
// (theta, zeta, i_d, i_q), input (i_d setpoint, i_q setpoint). The source
// voltage is held at operating_point(dev, scr).source_voltage.
Eigen::Vector4d smib_derivative(const GflDeviceParams& dev, double scr, const Eigen::Vector4d& x,
                                const Eigen::Vector2d& u);
double smib_active_power(const GflDeviceParams& dev, double scr, const Eigen::Vector4d& x,
                         const Eigen::Vector2d& u);
// Equilibrium (state, input) of the nonlinear SMIB equations.
std::pair<Eigen::Vector4d, Eigen::Vector2d> smib_equilibrium(const GflDeviceParams& dev, double scr);

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& a);
double spectral_abscissa(const Eigen::MatrixXd& a);

struct ScrBracket {
    double lo = 0.5;
    double hi = 20.0;
};

struct CgscrResult {
    double cgscr = 0.0;
    std::complex<double> critical_eigenvalue;  // imag >= 0
    double max_real_part = 0.0;
    int iterations = 0;
    bool non_monotone = false;  // more than one sign change seen over the bracket
    ScrBracket bracket;
};

// Bisection on the SMIB spectral abscissa. Requires instability at bracket.lo
// and stability at bracket.hi; otherwise throws BracketError.
CgscrResult compute_cgscr(const GflDeviceParams& dev, ScrBracket bracket = {});

// Union over modes of the SMIB spectra evaluated at each modal eigenvalue.
std::vector<std::complex<double>> modal_eigenvalues(const GflDeviceParams& dev,
                                                    const strength::ModalDecomposition& modes);

// Assembles the 4n-state model of n identical devices coupled through the
// Kron-reduced network, eliminating terminal voltages algebraically.
StateSpaceModel direct_full_model(const GflDeviceParams& dev,
                                  const network::KronReducedNetwork& reduced);

enum class Verdict { Stable, Unstable, Marginal };
std::string_view to_string(Verdict verdict);

inline constexpr double kStabilityEpsilon = 1e-6;  // 1/s

Verdict verdict_from_abscissa(double max_real_part);

struct StabilityAssessment {
    double gscr0 = 0.0;  // without GFM
    double gscr = 0.0;   // with the attachment
    double cgscr = 0.0;
    double margin = 0.0;
    std::vector<std::complex<double>> eigenvalues;  // sorted by real part, descending
    std::vector<double> damping_ratios;
    double max_real_part = 0.0;
    Verdict verdict = Verdict::Unstable;
    strength::ModalDecomposition modes;  // of the augmented network
    CgscrResult critical;
};

// Throws ConsistencyError when the eigenvalue verdict contradicts the
// gSCR-versus-CgSCR criterion outside the marginal band.
StabilityAssessment assess(const network::NetworkSpec& spec, const GflDeviceParams& dev,
                           const network::GfmAttachment& att, ScrBracket bracket = {});

double damping_ratio(std::complex<double> eigenvalue);

}  // namespace gridstrength::dynamics
