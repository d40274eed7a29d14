#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's numerical routines; the point is to get the same
// numbers by a different route.

#include "gridstrength/device_dynamics.hpp"
#include "gridstrength/network_model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace gridstrength::support {

std::filesystem::path source_dir();
std::filesystem::path fig3_path();
std::filesystem::path smib_path();
std::filesystem::path device_path();
double golden_cgscr();

struct RandomNetworkLimits {
    int max_farms = 6;
    int max_interior = 4;
    int max_infinite = 3;
};

// Random connected network: a random spanning tree hanging off the infinite
// buses plus a few extra chords. Susceptances in [0.5, 5], capacities in
// [10, 200] MVA on a 100 MVA base.
network::NetworkSpec random_network(std::mt19937_64& rng, RandomNetworkLimits limits = {});

// The 20 seeded random networks plus the bundled fig3 network.
std::vector<network::NetworkSpec> corpus();

// Grounded Laplacian assembled entry by entry from the branch list, farms
// first then interior nodes.
Eigen::MatrixXd laplacian_from_edges(const network::NetworkSpec& spec);

// Effective farm admittances: drive one farm at unit voltage, others at zero,
// solve the interior zero-injection equations and read off the injections.
Eigen::MatrixXd eliminate_by_solves(const Eigen::MatrixXd& b_full, std::size_t farm_count);

// Eigenvalues of S_B^{-1} B_r from a general nonsymmetric solver, ascending.
Eigen::VectorXd general_eigenvalues(const Eigen::MatrixXd& b_r, const Eigen::VectorXd& s_b);

// Largest relative distance under greedy nearest-neighbour pairing of two
// spectra; infinity when the sizes differ.
double spectrum_distance(const std::vector<std::complex<double>>& a,
                         const std::vector<std::complex<double>>& b);

// Hopf point of the device model at q_set = 0.
double closed_form_cgscr(const dynamics::GflDeviceParams& dev);

// Newton iteration on the two SMIB equilibrium equations in (theta, v_d)
// with the source voltage held fixed.
struct NewtonEquilibrium {
    double theta = 0.0;
    double v_d = 0.0;
    int iterations = 0;
    bool converged = false;
};
NewtonEquilibrium newton_equilibrium(double source_voltage, double reactance, double p_set,
                                     double q_set);

// Calibrated device as shipped.
dynamics::GflDeviceParams calibrated_device();

// Dominant (largest real part, positive imaginary) eigenvalue.
std::complex<double> dominant(const std::vector<std::complex<double>>& spectrum);

}  // namespace gridstrength::support
