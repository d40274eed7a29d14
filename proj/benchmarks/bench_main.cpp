#include "gridstrength/device_dynamics.hpp"
#include "gridstrength/grid_strength.hpp"
#include "gridstrength/network_model.hpp"
#include "gridstrength/simulation.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>
#include <string>

using namespace gridstrength;

namespace {

const std::filesystem::path kRoot = GRIDSTRENGTH_SOURCE_DIR;

// Ladder: farms hang off a chain of interior buses, both ends tied to grid.
network::NetworkSpec ladder(int farms) {
    std::vector<network::Node> nodes;
    std::vector<network::Branch> branches;
    nodes.push_back({"G0", network::NodeKind::InfiniteBus, 0.0});
    nodes.push_back({"G1", network::NodeKind::InfiniteBus, 0.0});
    for (int i = 0; i < farms; ++i) {
        const std::string f = "F" + std::to_string(i);
        const std::string n = "N" + std::to_string(i);
        nodes.push_back({f, network::NodeKind::WindFarm, 50.0 + 10.0 * (i % 5)});
        nodes.push_back({n, network::NodeKind::Interior, 0.0});
        branches.push_back({f, n, 3.0});
        branches.push_back({n, i == 0 ? "G0" : "N" + std::to_string(i - 1), 4.0 + 0.1 * i});
    }
    branches.push_back({"N" + std::to_string(farms - 1), "G1", 4.0});
    return network::make_network_spec(100.0, std::move(nodes), std::move(branches));
}

const dynamics::GflDeviceParams& device() {
    static const auto dev = dynamics::load_device(kRoot / "devices" / "calibrated_gfl.yaml");
    return dev;
}

void BM_KronReduce(benchmark::State& state) {
    const auto mats = network::build_susceptance(ladder(static_cast<int>(state.range(0))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(network::kron_reduce(mats));
    }
}
BENCHMARK(BM_KronReduce)->RangeMultiplier(4)->Range(4, 256);

void BM_Gscr(benchmark::State& state) {
    const auto reduced = network::kron_reduce(network::build_susceptance(ladder(static_cast<int>(state.range(0)))));
    for (auto _ : state) {
        benchmark::DoNotOptimize(strength::gscr(reduced));
    }
}
BENCHMARK(BM_Gscr)->RangeMultiplier(4)->Range(4, 256);

void BM_Cgscr(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(dynamics::compute_cgscr(device()));
    }
}
BENCHMARK(BM_Cgscr);

void BM_DirectFullModelSpectrum(benchmark::State& state) {
    const auto reduced = network::kron_reduce(network::build_susceptance(ladder(static_cast<int>(state.range(0)))));
    for (auto _ : state) {
        const auto model = dynamics::direct_full_model(device(), reduced);
        benchmark::DoNotOptimize(dynamics::spectral_abscissa(model.a));
    }
}
BENCHMARK(BM_DirectFullModelSpectrum)->RangeMultiplier(2)->Range(4, 64);

void BM_SimulateFig3(benchmark::State& state) {
    const auto spec = network::load_network(kRoot / "networks" / "fig3.yaml");
    const auto reduced = network::attach_gfm(network::kron_reduce(network::build_susceptance(spec)), {0.128, 0.16});
    const auto model = dynamics::direct_full_model(device(), reduced);
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulation::simulate(model, simulation::default_disturbance("F1")));
    }
}
BENCHMARK(BM_SimulateFig3)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
