#include "gridstrength/simulation.hpp"

#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <json.hpp>

#include <fstream>

namespace gridstrength::simulation {

namespace {

void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << body;
    out.flush();
    if (!out) {
        throw InputError("cannot write '" + path.string() + "'");
    }
}

}  // namespace

std::string traces_csv(const SimulationResult& result) {
    std::string csv = "t_s";
    for (const auto& id : result.farm_ids) {
        csv += ",farm_" + id + "_dP_pu";
    }
    csv += '\n';
    for (std::size_t k = 0; k < result.time.size(); ++k) {
        csv += text::format_exact(result.time[k]);
        for (const auto& trace : result.traces) {
            csv += ',';
            csv += text::format_exact(trace[k]);
        }
        csv += '\n';
    }
    return csv;
}

std::string metadata_json(const SimulationResult& result, const RunMetadata& meta) {
    nlohmann::ordered_json doc;
    doc["gamma"] = meta.gamma;
    doc["z_local"] = meta.z_local;
    doc["gscr"] = meta.gscr;
    doc["cgscr"] = meta.cgscr;
    doc["max_real_part"] = meta.max_real_part;
    doc["verdict"] = meta.verdict;
    doc["dt_s"] = result.dt;
    doc["duration_s"] = result.duration;
    doc["samples"] = result.time.size();
    doc["truncated"] = result.truncated;
    const Disturbance& d = result.disturbance;
    doc["disturbance"] = {{"kind", to_string(d.kind)},
                          {"farm", d.farm_id},
                          {"channel", to_string(d.channel)},
                          {"magnitude", d.magnitude},
                          {"t_apply_s", d.t_apply_s},
                          {"allow_large", d.allow_large}};
    doc["farms"] = result.farm_ids;
    return doc.dump(2) + "\n";
}

void write_outputs(const SimulationResult& result, const RunMetadata& meta,
                   const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw InputError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    write_text(dir / "traces.csv", traces_csv(result));
    write_text(dir / "traces.meta.json", metadata_json(result, meta));
}

}  // namespace gridstrength::simulation
