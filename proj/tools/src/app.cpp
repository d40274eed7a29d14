#include "gridstrength_cli/app.hpp"

#include "digest.hpp"

#include "gridstrength/device_dynamics.hpp"
#include "gridstrength/errors.hpp"
#include "gridstrength/grid_strength.hpp"
#include "gridstrength/network_model.hpp"
#include "gridstrength/simulation.hpp"
#include "gridstrength/text_format.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace gridstrength::cli {

namespace {

using nlohmann::ordered_json;
using text::format_sig6;

constexpr const char* kToolVersion = "0.1.0";

struct Context {
    std::ostream& out;
    std::ostream& err;
    Style style;
    bool json = false;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

std::string paint(const Context& ctx, std::string_view text, const char* code) {
    if (!ctx.style.color) {
        return std::string(text);
    }
    return std::string("\x1b[") + code + "m" + std::string(text) + "\x1b[0m";
}

std::string verdict_text(const Context& ctx, dynamics::Verdict v) {
    const char* code = v == dynamics::Verdict::Stable     ? "32"
                       : v == dynamics::Verdict::Unstable ? "31"
                                                          : "33";
    return paint(ctx, dynamics::to_string(v), code);
}

ordered_json begin_report(const std::string& command,
                          const std::vector<std::filesystem::path>& inputs) {
    ordered_json doc;
    doc["command"] = command;
    doc["tool_version"] = kToolVersion;
    ordered_json files = ordered_json::array();
    for (const auto& p : inputs) {
        files.push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
    }
    doc["inputs"] = files;
    return doc;
}

void emit_report(Context& ctx, ordered_json doc, ordered_json results) {
    doc["results"] = std::move(results);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - ctx.start;
    doc["wall_time_s"] = elapsed.count();
    ctx.out << doc.dump(2) << '\n';
}

ordered_json complex_json(std::complex<double> z) {
    return {{"re", z.real()}, {"im", z.imag()}};
}

std::string complex_text(std::complex<double> z) {
    const std::string sign = z.imag() < 0.0 ? " - " : " + ";
    return format_sig6(z.real()) + sign + format_sig6(std::abs(z.imag())) + "j";
}

std::string percent(double ratio) {
    return format_sig6(100.0 * ratio) + "%";
}

void line(Context& ctx, std::string_view label, const std::string& value) {
    std::string padded(label);
    padded.resize(std::max<std::size_t>(padded.size() + 1, 22), ' ');
    ctx.out << padded << value << '\n';
}

void require_positive_flag(double value, const char* flag) {
    if (!std::isfinite(value) || value <= 0.0) {
        throw InputError(std::string(flag) + " must be positive, got " + text::format_exact(value));
    }
}

void require_non_negative_flag(double value, const char* flag) {
    if (!std::isfinite(value) || value < 0.0) {
        throw InputError(std::string(flag) + " must be non-negative, got " +
                         text::format_exact(value));
    }
}

network::KronReducedNetwork reduce(const network::NetworkSpec& spec) {
    return network::kron_reduce(network::build_susceptance(spec));
}

// ---- gscr -------------------------------------------------------------

struct GscrOptions {
    std::string network;
};

int cmd_gscr(Context& ctx, const GscrOptions& o) {
    const auto spec = network::load_network(o.network);
    const auto modes = strength::compute_modes(reduce(spec));

    if (ctx.json) {
        ordered_json r;
        r["gscr"] = modes.gscr();
        r["farms"] = modes.farm_ids;
        r["capacities_mva"] = spec.farm_capacities_mva();
        r["s_global_mva"] = spec.s_global_mva();
        ordered_json list = ordered_json::array();
        for (std::size_t k = 0; k < modes.size(); ++k) {
            std::vector<double> participation;
            for (std::size_t i = 0; i < modes.size(); ++i) {
                participation.push_back(std::abs(modes.vectors(i, k)));
            }
            list.push_back({{"lambda", modes.lambdas(k)}, {"participation", participation}});
        }
        r["modes"] = list;
        emit_report(ctx, begin_report("gscr", {o.network}), r);
        return kExitOk;
    }

    line(ctx, "network", o.network);
    line(ctx, "farms", std::to_string(modes.size()));
    line(ctx, "gSCR", format_sig6(modes.gscr()));
    ctx.out << "\nmodes (ascending); participation = |eigenvector entry|\n";
    std::ostringstream head;
    head << "  mode  lambda      ";
    for (const auto& id : modes.farm_ids) {
        std::string cell = id;
        cell.resize(std::max<std::size_t>(cell.size() + 1, 10), ' ');
        head << cell;
    }
    ctx.out << head.str() << '\n';
    for (std::size_t k = 0; k < modes.size(); ++k) {
        std::string idx = std::to_string(k + 1);
        idx.resize(6, ' ');
        std::string lam = format_sig6(modes.lambdas(k));
        lam.resize(12, ' ');
        ctx.out << "  " << idx << lam;
        for (std::size_t i = 0; i < modes.size(); ++i) {
            std::string cell = format_sig6(std::abs(modes.vectors(i, k)));
            cell.resize(std::max<std::size_t>(modes.farm_ids[i].size() + 1, 10), ' ');
            ctx.out << cell;
        }
        ctx.out << '\n';
    }
    return kExitOk;
}

// ---- size-gfm ---------------------------------------------------------

struct SizeOptions {
    std::string network;
    double target = 0.0;
    double z_local = 0.0;
    std::optional<double> unit_mva;
};

int cmd_size(Context& ctx, const SizeOptions& o) {
    require_positive_flag(o.target, "--target-gscr");
    require_positive_flag(o.z_local, "--z-local");
    if (o.unit_mva) {
        require_positive_flag(*o.unit_mva, "--unit-mva");
    }
    const auto spec = network::load_network(o.network);
    const auto capacities = spec.farm_capacities_mva();
    const auto sizing = strength::size_network(reduce(spec), capacities, o.target, o.z_local, o.unit_mva);

    if (ctx.json) {
        ordered_json r;
        r["gscr0"] = sizing.gscr0;
        r["target_gscr"] = sizing.target_gscr;
        r["z_local"] = sizing.z_local;
        r["gamma"] = sizing.gamma_required;
        r["already_satisfied"] = sizing.already_satisfied;
        r["farms"] = sizing.farm_ids;
        r["gfm_capacity_mva"] = sizing.gfm_capacity_mva;
        r["verified_gscr"] = sizing.verified_gscr;
        if (sizing.units) {
            r["units"] = {{"unit_mva", *o.unit_mva},
                          {"counts", sizing.units->counts},
                          {"realized_gamma", sizing.units->realized_gamma},
                          {"min_realized_gamma", sizing.units->min_realized_gamma},
                          {"predicted_gscr", *sizing.units->predicted_gscr},
                          {"verified_gscr", *sizing.verified_gscr_with_units}};
        }
        emit_report(ctx, begin_report("size-gfm", {o.network}), r);
        return kExitOk;
    }

    line(ctx, "network", o.network);
    line(ctx, "gSCR0", format_sig6(sizing.gscr0));
    line(ctx, "target gSCR", format_sig6(sizing.target_gscr));
    line(ctx, "z_local (p.u.)", format_sig6(sizing.z_local));
    if (sizing.already_satisfied) {
        line(ctx, "gamma", "0% (already satisfied)");
    } else {
        line(ctx, "gamma", percent(sizing.gamma_required));
    }
    line(ctx, "verified gSCR", format_sig6(sizing.verified_gscr));
    ctx.out << "\nper farm\n";
    for (std::size_t i = 0; i < sizing.farm_ids.size(); ++i) {
        std::string row = "  " + sizing.farm_ids[i];
        row.resize(std::max<std::size_t>(row.size() + 1, 10), ' ');
        row += "capacity " + format_sig6(capacities[i]) + " MVA, GFM " +
               format_sig6(sizing.gfm_capacity_mva[i]) + " MVA";
        if (sizing.units) {
            row += ", units " + std::to_string(sizing.units->counts[i]) + " (gamma " +
                   percent(sizing.units->realized_gamma[i]) + ")";
        }
        ctx.out << row << '\n';
    }
    if (sizing.units) {
        ctx.out << '\n';
        line(ctx, "unit size (MVA)", format_sig6(*o.unit_mva));
        line(ctx, "min realized gamma", percent(sizing.units->min_realized_gamma));
        line(ctx, "predicted gSCR", format_sig6(*sizing.units->predicted_gscr));
        line(ctx, "verified gSCR (units)", format_sig6(*sizing.verified_gscr_with_units));
    }
    return kExitOk;
}

// ---- cgscr ------------------------------------------------------------

struct CgscrOptions {
    std::string device;
    std::vector<double> bracket;
};

dynamics::ScrBracket bracket_from(const std::vector<double>& values) {
    dynamics::ScrBracket b;
    if (!values.empty()) {
        b.lo = values.at(0);
        b.hi = values.at(1);
    }
    return b;
}

ordered_json cgscr_json(const dynamics::CgscrResult& c) {
    return {{"cgscr", c.cgscr},
            {"critical_eigenvalue", complex_json(c.critical_eigenvalue)},
            {"max_real_part", c.max_real_part},
            {"iterations", c.iterations},
            {"non_monotone", c.non_monotone},
            {"bracket", {c.bracket.lo, c.bracket.hi}}};
}

void warn_non_monotone(Context& ctx, const dynamics::CgscrResult& c) {
    if (c.non_monotone) {
        ctx.err << "warning: stability changes sign more than once over the bracket; "
                   "CgSCR is the crossing found by bisection\n";
    }
}

int cmd_cgscr(Context& ctx, const CgscrOptions& o) {
    const auto dev = dynamics::load_device(o.device);
    const auto c = dynamics::compute_cgscr(dev, bracket_from(o.bracket));
    warn_non_monotone(ctx, c);

    if (ctx.json) {
        emit_report(ctx, begin_report("cgscr", {o.device}), cgscr_json(c));
        return kExitOk;
    }
    line(ctx, "device", o.device);
    line(ctx, "CgSCR", format_sig6(c.cgscr));
    line(ctx, "critical eigenvalue", complex_text(c.critical_eigenvalue) + " 1/s");
    line(ctx, "frequency (Hz)",
         format_sig6(c.critical_eigenvalue.imag() / (2.0 * std::numbers::pi)));
    line(ctx, "bracket", "[" + format_sig6(c.bracket.lo) + ", " + format_sig6(c.bracket.hi) + "]");
    line(ctx, "iterations", std::to_string(c.iterations));
    return kExitOk;
}

// ---- assess -----------------------------------------------------------

struct AssessOptions {
    std::string network;
    std::string device;
    double gamma = 0.0;
    double z_local = 0.16;
};

int cmd_assess(Context& ctx, const AssessOptions& o) {
    require_non_negative_flag(o.gamma, "--gamma");
    require_positive_flag(o.z_local, "--z-local");
    const auto spec = network::load_network(o.network);
    const auto dev = dynamics::load_device(o.device);
    const auto a = dynamics::assess(spec, dev, {o.gamma, o.z_local});
    warn_non_monotone(ctx, a.critical);
    const int code = a.verdict == dynamics::Verdict::Unstable ? kExitUnstable : kExitOk;

    if (ctx.json) {
        ordered_json r;
        r["gamma"] = o.gamma;
        r["z_local"] = o.z_local;
        r["gscr0"] = a.gscr0;
        r["gscr"] = a.gscr;
        r["cgscr"] = a.cgscr;
        r["margin"] = a.margin;
        r["max_real_part"] = a.max_real_part;
        r["verdict"] = dynamics::to_string(a.verdict);
        r["modes"] = std::vector<double>(a.modes.lambdas.data(),
                                         a.modes.lambdas.data() + a.modes.lambdas.size());
        ordered_json ev = ordered_json::array();
        for (std::size_t k = 0; k < a.eigenvalues.size(); ++k) {
            auto e = complex_json(a.eigenvalues[k]);
            e["damping_ratio"] = a.damping_ratios[k];
            ev.push_back(e);
        }
        r["eigenvalues"] = ev;
        r["critical"] = cgscr_json(a.critical);
        emit_report(ctx, begin_report("assess", {o.network, o.device}), r);
        return code;
    }

    line(ctx, "network", o.network);
    line(ctx, "device", o.device);
    line(ctx, "gamma", percent(o.gamma));
    line(ctx, "z_local (p.u.)", format_sig6(o.z_local));
    line(ctx, "gSCR0", format_sig6(a.gscr0));
    line(ctx, "gSCR", format_sig6(a.gscr));
    line(ctx, "CgSCR", format_sig6(a.cgscr));
    line(ctx, "margin", format_sig6(a.margin));
    line(ctx, "max Re(lambda) (1/s)", format_sig6(a.max_real_part));
    line(ctx, "verdict", verdict_text(ctx, a.verdict));
    ctx.out << "\neigenvalues (1/s), damping ratio\n";
    for (std::size_t k = 0; k < a.eigenvalues.size(); ++k) {
        std::string z = complex_text(a.eigenvalues[k]);
        z.resize(std::max<std::size_t>(z.size() + 1, 28), ' ');
        ctx.out << "  " << z << format_sig6(a.damping_ratios[k]) << '\n';
    }
    return code;
}

// ---- simulate ---------------------------------------------------------

struct SimulateOptions {
    std::string network;
    std::string device;
    double gamma = 0.0;
    double z_local = 0.16;
    std::string out_dir;
    double dt = simulation::kDefaultDt;
    double duration = simulation::kDefaultDuration;
    std::string kind = "setpoint_step";
    std::string farm;
    std::string channel = "i_d";
    double magnitude = 0.05;
    double t_apply = 0.1;
    bool allow_large = false;
};

int cmd_simulate(Context& ctx, const SimulateOptions& o) {
    require_non_negative_flag(o.gamma, "--gamma");
    require_positive_flag(o.z_local, "--z-local");
    require_positive_flag(o.dt, "--dt");
    require_positive_flag(o.duration, "--duration");
    const auto spec = network::load_network(o.network);
    const auto dev = dynamics::load_device(o.device);

    simulation::Disturbance dist;
    dist.kind = simulation::parse_disturbance_kind(o.kind);
    dist.channel = simulation::parse_channel(o.channel);
    dist.farm_id = o.farm.empty() ? spec.farm_ids().front() : o.farm;
    dist.magnitude = o.magnitude;
    dist.t_apply_s = o.t_apply;
    dist.allow_large = o.allow_large;

    const network::GfmAttachment att{o.gamma, o.z_local};
    const auto augmented = network::attach_gfm(reduce(spec), att);
    const auto model = dynamics::direct_full_model(dev, augmented);
    const auto result = simulation::simulate(model, dist, o.duration, o.dt);

    simulation::RunMetadata meta;
    meta.gamma = o.gamma;
    meta.z_local = o.z_local;
    meta.gscr = strength::gscr(augmented);
    const auto critical = dynamics::compute_cgscr(dev);
    meta.cgscr = critical.cgscr;
    meta.max_real_part = dynamics::spectral_abscissa(model.a);
    meta.verdict = std::string(dynamics::to_string(dynamics::verdict_from_abscissa(meta.max_real_part)));
    simulation::write_outputs(result, meta, o.out_dir);

    const auto damping = simulation::estimate_damping(result);
    const std::filesystem::path dir(o.out_dir);

    if (ctx.json) {
        ordered_json r;
        r["gamma"] = meta.gamma;
        r["z_local"] = meta.z_local;
        r["gscr"] = meta.gscr;
        r["cgscr"] = meta.cgscr;
        r["max_real_part"] = meta.max_real_part;
        r["verdict"] = meta.verdict;
        r["dt_s"] = result.dt;
        r["duration_s"] = result.duration;
        r["samples"] = result.time.size();
        r["truncated"] = result.truncated;
        r["traces_csv"] = (dir / "traces.csv").generic_string();
        r["metadata_json"] = (dir / "traces.meta.json").generic_string();
        ordered_json farms = ordered_json::array();
        for (std::size_t j = 0; j < damping.size(); ++j) {
            ordered_json f;
            f["farm"] = damping[j].farm_id;
            f["residual_ratio"] = simulation::residual_ratio(result.traces[j]);
            if (damping[j].estimate) {
                f["damping_ratio"] = damping[j].estimate->zeta;
                f["decay_rate"] = damping[j].estimate->sigma;
                f["omega"] = damping[j].estimate->omega;
                f["growing"] = result.truncated || damping[j].estimate->zeta < 0.0;
            } else {
                f["damping_ratio"] = nullptr;
                f["growing"] = result.truncated;
                f["note"] = damping[j].note;
            }
            farms.push_back(f);
        }
        r["farms"] = farms;
        emit_report(ctx, begin_report("simulate", {o.network, o.device}), r);
        return kExitOk;
    }

    line(ctx, "gamma", percent(meta.gamma));
    line(ctx, "gSCR", format_sig6(meta.gscr));
    line(ctx, "CgSCR", format_sig6(meta.cgscr));
    line(ctx, "max Re(lambda) (1/s)", format_sig6(meta.max_real_part));
    line(ctx, "verdict", verdict_text(ctx, dynamics::verdict_from_abscissa(meta.max_real_part)));
    line(ctx, "samples", std::to_string(result.time.size()));
    if (result.truncated) {
        line(ctx, "truncated", paint(ctx, "yes, state exceeded the overflow guard", "31"));
    }
    line(ctx, "traces", (dir / "traces.csv").generic_string());
    ctx.out << "\ndamping estimates (log-decrement)\n";
    for (std::size_t j = 0; j < damping.size(); ++j) {
        std::string id = "  " + damping[j].farm_id;
        id.resize(std::max<std::size_t>(id.size() + 1, 10), ' ');
        if (damping[j].estimate) {
            const bool growing = result.truncated || damping[j].estimate->zeta < 0.0;
            ctx.out << id << "zeta " << format_sig6(damping[j].estimate->zeta)
                    << (growing ? "  growing" : "") << '\n';
        } else {
            ctx.out << id << "n/a (" << damping[j].note << ")\n";
        }
    }
    return kExitOk;
}

template <typename F>
int guarded(Context& ctx, F&& body) {
    try {
        return body();
    } catch (const BracketError& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitBracket;
    } catch (const InputError& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        ctx.err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace

Style detect_style() {
    Style s;
    s.color = isatty(STDOUT_FILENO) != 0 && std::getenv("GRIDSTRENGTH_NO_COLOR") == nullptr;
    return s;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, Style style) {
    Context ctx{out, err, style};

    CLI::App app{"Grid strength (gSCR) analysis and grid-forming capacity sizing", "gridstrength"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    GscrOptions gscr_opts;
    auto* gscr = app.add_subcommand("gscr", "gSCR and modal decomposition of a network");
    gscr->add_option("network", gscr_opts.network, "network file")->required();
    gscr->add_flag("--json", ctx.json, "emit the machine-readable report");

    SizeOptions size_opts;
    auto* size = app.add_subcommand("size-gfm", "size grid-forming capacity for a target gSCR");
    size->add_option("network", size_opts.network, "network file")->required();
    size->add_option("--target-gscr", size_opts.target, "required gSCR")->required();
    size->add_option("--z-local", size_opts.z_local, "GFM internal reactance (p.u., own base)")
        ->required();
    size->add_option("--unit-mva", size_opts.unit_mva, "GFM unit size for count planning");
    size->add_flag("--json", ctx.json, "emit the machine-readable report");

    CgscrOptions cg_opts;
    auto* cg = app.add_subcommand("cgscr", "critical SCR of a grid-following device");
    cg->add_option("device", cg_opts.device, "device file")->required();
    cg->add_option("--bracket", cg_opts.bracket, "SCR search interval: LO HI")->expected(2);
    cg->add_flag("--json", ctx.json, "emit the machine-readable report");

    AssessOptions as_opts;
    auto* as = app.add_subcommand("assess", "small-signal stability of a network of GFL farms");
    as->add_option("network", as_opts.network, "network file")->required();
    as->add_option("device", as_opts.device, "device file")->required();
    as->add_option("--gamma", as_opts.gamma, "GFM capacity ratio")->capture_default_str();
    as->add_option("--z-local", as_opts.z_local, "GFM internal reactance")->capture_default_str();
    as->add_flag("--json", ctx.json, "emit the machine-readable report");

    SimulateOptions sim_opts;
    auto* sim = app.add_subcommand("simulate", "linear time-domain response to a disturbance");
    sim->add_option("network", sim_opts.network, "network file")->required();
    sim->add_option("device", sim_opts.device, "device file")->required();
    sim->add_option("--gamma", sim_opts.gamma, "GFM capacity ratio")->required();
    sim->add_option("--out", sim_opts.out_dir, "output directory")->required();
    sim->add_option("--z-local", sim_opts.z_local, "GFM internal reactance")->capture_default_str();
    sim->add_option("--dt", sim_opts.dt, "time step (s)")->capture_default_str();
    sim->add_option("--duration", sim_opts.duration, "window length (s)")->capture_default_str();
    sim->add_option("--disturbance", sim_opts.kind, "setpoint_step or state_impulse")
        ->capture_default_str();
    sim->add_option("--farm", sim_opts.farm, "disturbed farm (default: first farm)");
    sim->add_option("--channel", sim_opts.channel, "i_d, i_q or pll_angle")->capture_default_str();
    sim->add_option("--magnitude", sim_opts.magnitude, "p.u. or rad")->capture_default_str();
    sim->add_option("--t-apply", sim_opts.t_apply, "disturbance time (s)")->capture_default_str();
    sim->add_flag("--allow-large", sim_opts.allow_large, "lift the 0.1 small-signal limit");
    sim->add_flag("--json", ctx.json, "emit the machine-readable report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInput;
    }

    if (gscr->parsed()) {
        return guarded(ctx, [&] { return cmd_gscr(ctx, gscr_opts); });
    }
    if (size->parsed()) {
        return guarded(ctx, [&] { return cmd_size(ctx, size_opts); });
    }
    if (cg->parsed()) {
        return guarded(ctx, [&] { return cmd_cgscr(ctx, cg_opts); });
    }
    if (as->parsed()) {
        return guarded(ctx, [&] { return cmd_assess(ctx, as_opts); });
    }
    return guarded(ctx, [&] { return cmd_simulate(ctx, sim_opts); });
}

}  // namespace gridstrength::cli
