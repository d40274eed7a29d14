#pragma once

#include "gridstrength/device_dynamics.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridstrength::simulation {

enum class DisturbanceKind { StateImpulse, SetpointStep };
enum class Channel { CurrentD, CurrentQ, PllAngle };

std::string_view to_string(DisturbanceKind kind);
std::string_view to_string(Channel channel);
DisturbanceKind parse_disturbance_kind(std::string_view text);
Channel parse_channel(std::string_view text);

inline constexpr double kSmallSignalLimit = 0.1;  // p.u. or rad

struct Disturbance {
    DisturbanceKind kind = DisturbanceKind::SetpointStep;
    std::string farm_id;  // must name a device of the simulated model
    Channel channel = Channel::CurrentD;
    double magnitude = 0.05;
    double t_apply_s = 0.1;
    bool allow_large = false;  // lifts the small-signal magnitude limit

    // Setpoint steps exist only for the current channels.
    void validate() const;
};

// 0.05 p.u. step on the given farm's i_d setpoint at t = 0.1 s.
Disturbance default_disturbance(std::string farm_id);

inline constexpr double kDefaultDt = 1e-3;
inline constexpr double kDefaultDuration = 3.0;
inline constexpr double kOverflowGuard = 1e6;

struct SimulationResult {
    std::vector<double> time;                 // uniform grid, k * dt
    std::vector<std::string> farm_ids;
    std::vector<std::vector<double>> traces;  // per farm active-power deviation (p.u.)
    double dt = 0.0;
    double duration = 0.0;
    Disturbance disturbance;
    // Set when some state exceeded kOverflowGuard; the grid then ends at the
    // last sample inside the guard.
    bool truncated = false;
};

// Exact zero-order-hold propagation x_{k+1} = exp(A dt) x_k + Gamma u_k.
// A disturbance falling between samples is propagated over the partial
// interval exactly.
SimulationResult simulate(const dynamics::StateSpaceModel& model, const Disturbance& dist,
                          double duration = kDefaultDuration, double dt = kDefaultDt);

// exp(A h) and the input integral (int_0^h exp(A s) ds) B, via one
// augmented matrix exponential.
struct Discretization {
    Eigen::MatrixXd phi;
    Eigen::MatrixXd gamma;
};
Discretization discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double h);

struct DampingEstimate {
    double zeta = 0.0;
    double sigma = 0.0;  // fitted decay rate, 1/s (negative when growing)
    double omega = 0.0;  // rad/s from the mean peak spacing
    std::vector<double> peak_times;
};

// Log-decrement over successive peak-to-trough amplitudes of the trace,
// restricted to the second half of the window when it holds enough peaks.
// Throws InputError("insufficient oscillation for log-decrement").
DampingEstimate estimate_damping(std::span<const double> time, std::span<const double> trace);

struct TraceDamping {
    std::string farm_id;
    std::optional<DampingEstimate> estimate;
    std::string note;  // reason when no estimate is available
};

// Per-farm estimates over the samples at or after the disturbance.
std::vector<TraceDamping> estimate_damping(const SimulationResult& result);

// Growth of a trace about its final value: the ratio of the largest
// deviation in the last quarter of the window to the largest deviation
// overall. Values near 1 mean the response has not decayed.
double residual_ratio(std::span<const double> trace);

// Context recorded next to the traces.
struct RunMetadata {
    double gamma = 0.0;
    double z_local = 0.0;
    double gscr = 0.0;
    double cgscr = 0.0;
    double max_real_part = 0.0;
    std::string verdict;
};

// CSV: header "t_s,farm_<id>_dP_pu,..." then one row per sample, numbers in
// shortest round-trip form.
std::string traces_csv(const SimulationResult& result);
// JSON document describing the run; see docs/schema.md.
std::string metadata_json(const SimulationResult& result, const RunMetadata& meta);

// Writes traces.csv and traces.meta.json into `dir` (created if missing).
void write_outputs(const SimulationResult& result, const RunMetadata& meta,
                   const std::filesystem::path& dir);

}  // namespace gridstrength::simulation
