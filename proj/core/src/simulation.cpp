#include "gridstrength/simulation.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gridstrength::simulation {

namespace {

// Samples closer than this fraction of dt to a disturbance count as on-grid.
constexpr double kGridSnap = 1e-9;
constexpr std::size_t kMinPeaks = 3;

Eigen::Index device_index(const dynamics::StateSpaceModel& model, const std::string& farm_id) {
    const auto it = std::find(model.device_ids.begin(), model.device_ids.end(), farm_id);
    if (it == model.device_ids.end()) {
        throw InputError("disturbance targets unknown farm '" + farm_id + "'");
    }
    return static_cast<Eigen::Index>(it - model.device_ids.begin());
}

struct Extremum {
    bool is_max;
    double t;
    double value;
};

// Vertex of the parabola through three neighbouring samples.
Extremum refine(std::span<const double> time, std::span<const double> y, std::size_t i, bool is_max) {
    const double a = y[i - 1], b = y[i], c = y[i + 1];
    const double den = a - 2.0 * b + c;
    const double h = time[i + 1] - time[i];
    if (den == 0.0) {
        return {is_max, time[i], b};
    }
    const double p = 0.5 * (a - c) / den;
    return {is_max, time[i] + p * h, b - 0.25 * (a - c) * p};
}

}  // namespace

std::string_view to_string(DisturbanceKind kind) {
    return kind == DisturbanceKind::StateImpulse ? "state_impulse" : "setpoint_step";
}

std::string_view to_string(Channel channel) {
    switch (channel) {
    case Channel::CurrentD:
        return "i_d";
    case Channel::CurrentQ:
        return "i_q";
    case Channel::PllAngle:
        return "pll_angle";
    }
    return "unknown";
}

DisturbanceKind parse_disturbance_kind(std::string_view text) {
    if (text == "state_impulse") {
        return DisturbanceKind::StateImpulse;
    }
    if (text == "setpoint_step") {
        return DisturbanceKind::SetpointStep;
    }
    throw InputError("unknown disturbance kind '" + std::string(text) +
                     "' (expected state_impulse or setpoint_step)");
}

Channel parse_channel(std::string_view text) {
    if (text == "i_d") {
        return Channel::CurrentD;
    }
    if (text == "i_q") {
        return Channel::CurrentQ;
    }
    if (text == "pll_angle") {
        return Channel::PllAngle;
    }
    throw InputError("unknown disturbance channel '" + std::string(text) +
                     "' (expected i_d, i_q or pll_angle)");
}

void Disturbance::validate() const {
    if (!std::isfinite(magnitude)) {
        throw InputError("disturbance magnitude must be finite");
    }
    if (!allow_large && std::abs(magnitude) > kSmallSignalLimit) {
        throw InputError("disturbance magnitude " + text::format_exact(magnitude) +
                         " exceeds the small-signal limit of 0.1; pass the override to allow it");
    }
    if (!std::isfinite(t_apply_s) || t_apply_s < 0.0) {
        throw InputError("disturbance time must be non-negative");
    }
    if (kind == DisturbanceKind::SetpointStep && channel == Channel::PllAngle) {
        throw InputError("pll_angle has no setpoint; use a state_impulse for that channel");
    }
}

Disturbance default_disturbance(std::string farm_id) {
    Disturbance d;
    d.farm_id = std::move(farm_id);
    return d;
}

Discretization discretize(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double h) {
    const Eigen::Index n = a.rows();
    const Eigen::Index m = b.cols();
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(n + m, n + m);
    augmented.topLeftCorner(n, n) = a * h;
    augmented.topRightCorner(n, m) = b * h;
    const Eigen::MatrixXd e = augmented.exp();
    return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

SimulationResult simulate(const dynamics::StateSpaceModel& model, const Disturbance& dist,
                          double duration, double dt) {
    model.validate();
    dist.validate();
    if (!std::isfinite(dt) || dt <= 0.0) {
        throw InputError("time step must be positive");
    }
    if (!std::isfinite(duration) || duration < dt) {
        throw InputError("duration must be at least one time step");
    }

    const Eigen::Index dev = device_index(model, dist.farm_id);
    const Eigen::Index n = model.a.rows();
    const auto steps = static_cast<long long>(std::floor(duration / dt + kGridSnap));

    Eigen::VectorXd impulse = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd input = Eigen::VectorXd::Zero(model.b.cols());
    if (dist.kind == DisturbanceKind::StateImpulse) {
        const auto state = dist.channel == Channel::CurrentD  ? dynamics::DeviceState::CurrentD
                           : dist.channel == Channel::CurrentQ ? dynamics::DeviceState::CurrentQ
                                                               : dynamics::DeviceState::PllAngle;
        impulse(dynamics::kStatesPerDevice * dev + static_cast<Eigen::Index>(state)) = dist.magnitude;
    } else {
        const auto in = dist.channel == Channel::CurrentD ? dynamics::DeviceInput::CurrentDSetpoint
                                                          : dynamics::DeviceInput::CurrentQSetpoint;
        input(2 * dev + static_cast<Eigen::Index>(in)) = dist.magnitude;
    }

    // First sample at or after the disturbance.
    const auto k_apply = static_cast<long long>(std::ceil(dist.t_apply_s / dt - kGridSnap));
    const double offset = static_cast<double>(k_apply) * dt - dist.t_apply_s;
    const bool on_grid = std::abs(offset) <= kGridSnap * dt;

    const Discretization full = discretize(model.a, model.b, dt);
    Discretization partial;
    if (!on_grid && k_apply <= steps) {
        partial = discretize(model.a, model.b, offset);
    }

    SimulationResult out;
    out.farm_ids = model.device_ids;
    out.traces.assign(model.c.rows(), {});
    out.dt = dt;
    out.disturbance = dist;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(model.b.cols());
    for (long long k = 0; k <= steps; ++k) {
        if (k == k_apply) {
            if (on_grid && dist.kind == DisturbanceKind::StateImpulse) {
                x += impulse;
            }
            u = input;
        }
        if (x.cwiseAbs().maxCoeff() > kOverflowGuard) {
            out.truncated = true;
            break;
        }
        const Eigen::VectorXd y = model.c * x + model.d * u;
        out.time.push_back(static_cast<double>(k) * dt);
        for (Eigen::Index j = 0; j < y.size(); ++j) {
            out.traces[j].push_back(y(j));
        }
        if (k == steps) {
            break;
        }
        Eigen::VectorXd next = full.phi * x + full.gamma * u;
        if (!on_grid && k + 1 == k_apply) {
            if (dist.kind == DisturbanceKind::StateImpulse) {
                next += partial.phi * impulse;
            } else {
                next += partial.gamma * input;
            }
        }
        x = std::move(next);
    }
    out.duration = out.time.empty() ? 0.0 : out.time.back();
    return out;
}

DampingEstimate estimate_damping(std::span<const double> time, std::span<const double> trace) {
    if (time.size() != trace.size()) {
        throw InputError("time grid and trace lengths differ");
    }
    std::vector<Extremum> extrema;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i) {
        if (trace[i] > trace[i - 1] && trace[i] >= trace[i + 1]) {
            extrema.push_back(refine(time, trace, i, true));
        } else if (trace[i] < trace[i - 1] && trace[i] <= trace[i + 1]) {
            extrema.push_back(refine(time, trace, i, false));
        }
    }

    // Peak-to-trough amplitudes cancel any offset of the oscillation.
    std::vector<double> times, amplitudes;
    for (std::size_t k = 0; k + 1 < extrema.size(); ++k) {
        if (extrema[k].is_max && !extrema[k + 1].is_max) {
            const double amp = extrema[k].value - extrema[k + 1].value;
            if (amp > 0.0) {
                times.push_back(extrema[k].t);
                amplitudes.push_back(amp);
            }
        }
    }
    if (times.size() < kMinPeaks) {
        throw InputError("insufficient oscillation for log-decrement");
    }

    const double midpoint = time.front() + 0.5 * (time.back() - time.front());
    const auto late = std::find_if(times.begin(), times.end(), [&](double t) { return t >= midpoint; });
    const auto skip = static_cast<std::size_t>(late - times.begin());
    if (times.size() - skip >= kMinPeaks) {
        times.erase(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(skip));
        amplitudes.erase(amplitudes.begin(), amplitudes.begin() + static_cast<std::ptrdiff_t>(skip));
    }

    // Least-squares line through (t, ln amplitude).
    const double count = static_cast<double>(times.size());
    const double t_mean = std::accumulate(times.begin(), times.end(), 0.0) / count;
    double l_mean = 0.0;
    for (double a : amplitudes) {
        l_mean += std::log(a);
    }
    l_mean /= count;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        sxy += (times[k] - t_mean) * (std::log(amplitudes[k]) - l_mean);
        sxx += (times[k] - t_mean) * (times[k] - t_mean);
    }
    const double slope = sxy / sxx;

    DampingEstimate est;
    est.sigma = -slope;
    est.omega = 2.0 * std::numbers::pi * (count - 1.0) / (times.back() - times.front());
    est.zeta = est.sigma / std::hypot(est.sigma, est.omega);
    est.peak_times = std::move(times);
    return est;
}

std::vector<TraceDamping> estimate_damping(const SimulationResult& result) {
    std::size_t first = 0;
    while (first < result.time.size() &&
           result.time[first] < result.disturbance.t_apply_s - kGridSnap * result.dt) {
        ++first;
    }
    std::vector<TraceDamping> out;
    for (std::size_t j = 0; j < result.traces.size(); ++j) {
        TraceDamping td;
        td.farm_id = result.farm_ids.at(j);
        const std::span<const double> t(result.time);
        const std::span<const double> y(result.traces[j]);
        try {
            td.estimate = estimate_damping(t.subspan(first), y.subspan(first));
        } catch (const InputError& e) {
            td.note = e.what();
        }
        out.push_back(std::move(td));
    }
    return out;
}

double residual_ratio(std::span<const double> trace) {
    if (trace.empty()) {
        return 0.0;
    }
    const double final_value = trace.back();
    double overall = 0.0, tail = 0.0;
    const std::size_t tail_start = trace.size() - trace.size() / 4;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double dev = std::abs(trace[i] - final_value);
        overall = std::max(overall, dev);
        if (i >= tail_start) {
            tail = std::max(tail, dev);
        }
    }
    return overall == 0.0 ? 0.0 : tail / overall;
}

}  // namespace gridstrength::simulation
