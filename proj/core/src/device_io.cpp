#include "gridstrength/device_dynamics.hpp"

#include "gridstrength/errors.hpp"
#include "yaml_support.hpp"

namespace gridstrength::dynamics {

GflDeviceParams parse_device(std::string_view text) {
    const YAML::Node root = yaml_support::load(text, "device");
    const std::string where = "device document";
    yaml_support::require_map(root, where);
    yaml_support::check_keys(root, where,
                             {"pll_kp", "pll_ki", "current_loop_tau_s", "p_set_pu", "q_set_pu",
                              "base_freq_hz", "v_terminal_pu", "name", "description"});

    GflDeviceParams dev;
    dev.pll_kp = yaml_support::require_number(root, "pll_kp", where);
    dev.pll_ki = yaml_support::require_number(root, "pll_ki", where);
    dev.current_loop_tau_s = yaml_support::require_number(root, "current_loop_tau_s", where);
    dev.p_set_pu = yaml_support::require_number(root, "p_set_pu", where);
    dev.q_set_pu = yaml_support::require_number(root, "q_set_pu", where);
    dev.base_freq_hz = yaml_support::require_number(root, "base_freq_hz", where);
    dev.v_terminal_pu = yaml_support::optional_number(root, "v_terminal_pu", where, 1.0);
    try {
        dev.validate();
    } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
    }
    return dev;
}

GflDeviceParams load_device(const std::filesystem::path& path) {
    return parse_device(yaml_support::read_file(path));
}

}  // namespace gridstrength::dynamics
