#include "gridstrength/errors.hpp"
#include "gridstrength/grid_strength.hpp"
#include "gridstrength/simulation.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gridstrength;
using simulation::Channel;
using simulation::Disturbance;
using simulation::DisturbanceKind;

namespace {

dynamics::StateSpaceModel fig3_model(double gamma) {
    const auto spec = network::load_network(support::fig3_path());
    const auto reduced = network::kron_reduce(network::build_susceptance(spec));
    return dynamics::direct_full_model(support::calibrated_device(),
                                       network::attach_gfm(reduced, {gamma, 0.16}));
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

}  // namespace

TEST(Simulate, ZeroDisturbanceGivesZeroTraces) {
    auto dist = simulation::default_disturbance("F1");
    dist.magnitude = 0.0;
    const auto r = simulation::simulate(fig3_model(0.128), dist, 0.5, 1e-3);
    ASSERT_EQ(r.time.size(), 501u);
    for (const auto& trace : r.traces) {
        ASSERT_EQ(trace.size(), r.time.size());
        EXPECT_EQ(max_abs(trace), 0.0);
    }
}

TEST(Simulate, SmibEnvelopeFollowsEigenvalue) {
    const auto dev = support::calibrated_device();
    const auto model = dynamics::build_smib_model(dev, 2.5);
    const double sigma = dynamics::spectral_abscissa(model.a);
    ASSERT_LT(sigma, 0.0);
    Disturbance d;
    d.kind = DisturbanceKind::StateImpulse;
    d.channel = Channel::PllAngle;
    d.farm_id = "device";
    d.magnitude = 0.01;
    d.t_apply_s = 0.0;
    const auto r = simulation::simulate(model, d, 1.0, 1e-3);
    const auto est = simulation::estimate_damping(r.time, r.traces[0]);
    EXPECT_NEAR(-est.sigma, sigma, 0.1 * std::abs(sigma));
}

TEST(Simulate, Fig3GrowsWithoutGfmAndDecaysWithIt) {
    const auto weak = simulation::simulate(fig3_model(0.0), simulation::default_disturbance("F1"));
    const auto weak_est = simulation::estimate_damping(weak);
    EXPECT_TRUE(weak.truncated || (weak_est[0].estimate && weak_est[0].estimate->zeta < 0.0));
    for (const auto& trace : weak.traces) {
        for (double y : trace) {
            ASSERT_TRUE(std::isfinite(y));
        }
    }
    const auto strong = simulation::simulate(fig3_model(0.128), simulation::default_disturbance("F1"));
    EXPECT_FALSE(strong.truncated);
    EXPECT_EQ(strong.time.size(), 3001u);
    EXPECT_LT(simulation::residual_ratio(strong.traces[0]), 0.05);
}

TEST(Simulate, HalvingStepKeepsSamples) {
    const auto model = fig3_model(0.128);
    const auto coarse = simulation::simulate(model, simulation::default_disturbance("F1"), 3.0, 1e-3);
    const auto fine = simulation::simulate(model, simulation::default_disturbance("F1"), 3.0, 5e-4);
    ASSERT_EQ(fine.time.size(), 2 * coarse.time.size() - 1);
    for (std::size_t j = 0; j < coarse.traces.size(); ++j) {
        const double scale = max_abs(coarse.traces[j]);
        for (std::size_t k = 0; k < coarse.time.size(); ++k) {
            EXPECT_NEAR(coarse.traces[j][k], fine.traces[j][2 * k], 1e-9 * scale);
        }
    }
}

TEST(Simulate, DisturbanceBetweenSamples) {
    const auto model = fig3_model(0.1);
    for (auto kind : {DisturbanceKind::SetpointStep, DisturbanceKind::StateImpulse}) {
        auto d = simulation::default_disturbance("F2");
        d.kind = kind;
        d.t_apply_s = 0.1005;
        const auto coarse = simulation::simulate(model, d, 1.0, 1e-3);
        const auto fine = simulation::simulate(model, d, 1.0, 5e-4);
        for (std::size_t j = 0; j < coarse.traces.size(); ++j) {
            const double scale = max_abs(coarse.traces[j]);
            ASSERT_GT(scale, 0.0);
            for (std::size_t k = 0; k < coarse.time.size(); ++k) {
                EXPECT_NEAR(coarse.traces[j][k], fine.traces[j][2 * k], 1e-9 * scale);
            }
        }
    }
}

TEST(Simulate, Superposition) {
    const auto model = fig3_model(0.05);
    auto a = simulation::default_disturbance("F1");
    a.magnitude = 0.03;
    auto b = a;
    b.magnitude = 0.04;
    auto sum = a;
    sum.magnitude = 0.07;
    const auto ra = simulation::simulate(model, a, 1.0, 1e-3);
    const auto rb = simulation::simulate(model, b, 1.0, 1e-3);
    const auto rs = simulation::simulate(model, sum, 1.0, 1e-3);
    for (std::size_t j = 0; j < rs.traces.size(); ++j) {
        for (std::size_t k = 0; k < rs.time.size(); ++k) {
            EXPECT_NEAR(rs.traces[j][k], ra.traces[j][k] + rb.traces[j][k], 1e-10);
        }
    }
}

TEST(Simulate, EigenConsistencyOverCorpus) {
    const auto dev = support::calibrated_device();
    for (const auto& spec : support::corpus()) {
        const auto reduced = network::kron_reduce(network::build_susceptance(spec));
        const auto model = dynamics::direct_full_model(dev, reduced);
        const double abscissa = dynamics::spectral_abscissa(model.a);
        if (std::abs(abscissa) < 0.5) {
            continue;  // too slow to classify within the window
        }
        // A mode can have no weight at a given farm, so kick each farm in turn.
        bool grew = false;
        for (const auto& id : spec.farm_ids()) {
            const auto r = simulation::simulate(model, simulation::default_disturbance(id));
            grew = grew || r.truncated;
            for (const auto& trace : r.traces) {
                grew = grew || simulation::residual_ratio(trace) > 0.5;
            }
        }
        EXPECT_EQ(grew, abscissa > 0.0) << "abscissa " << abscissa;
    }
}

TEST(Simulate, Validation) {
    const auto model = fig3_model(0.1);
    auto d = simulation::default_disturbance("F1");
    d.magnitude = 0.2;
    EXPECT_THROW(simulation::simulate(model, d), InputError);
    d.allow_large = true;
    EXPECT_NO_THROW(simulation::simulate(model, d, 0.1, 1e-3));
    d = simulation::default_disturbance("nope");
    EXPECT_THROW(simulation::simulate(model, d), InputError);
    d = simulation::default_disturbance("F1");
    d.channel = Channel::PllAngle;
    EXPECT_THROW(simulation::simulate(model, d), InputError);
    d = simulation::default_disturbance("F1");
    EXPECT_THROW(simulation::simulate(model, d, 3.0, 0.0), InputError);
    EXPECT_THROW(simulation::simulate(model, d, 1e-4, 1e-3), InputError);
    EXPECT_THROW(simulation::parse_channel("omega"), InputError);
    EXPECT_THROW(simulation::parse_disturbance_kind("ramp"), InputError);
}

TEST(Discretize, MatchesScalarClosedForm) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, -3.0);
    const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(1, 1, 2.0);
    const auto d = simulation::discretize(a, b, 0.1);
    EXPECT_NEAR(d.phi(0, 0), std::exp(-0.3), 1e-15);
    EXPECT_NEAR(d.gamma(0, 0), 2.0 * (1.0 - std::exp(-0.3)) / 3.0, 1e-15);
}

TEST(EstimateDamping, SyntheticDecay) {
    std::vector<double> t, y;
    for (int k = 0; k <= 10000; ++k) {
        t.push_back(k * 1e-3);
        y.push_back(std::exp(-0.1 * t.back()) * std::sin(2.0 * std::numbers::pi * 5.0 * t.back()));
    }
    const double expected = 0.1 / std::hypot(0.1, 2.0 * std::numbers::pi * 5.0);
    const auto est = simulation::estimate_damping(t, y);
    EXPECT_NEAR(est.zeta, expected, 0.05 * expected);
    EXPECT_GE(est.peak_times.size(), 3u);
}

TEST(EstimateDamping, UndampedSinusoid) {
    std::vector<double> t, y;
    for (int k = 0; k <= 5000; ++k) {
        t.push_back(k * 1e-3);
        y.push_back(0.3 + std::sin(2.0 * std::numbers::pi * 7.0 * t.back()));
    }
    EXPECT_NEAR(simulation::estimate_damping(t, y).zeta, 0.0, 1e-3);
}

TEST(EstimateDamping, TooFewPeaks) {
    std::vector<double> t, y;
    for (int k = 0; k <= 1000; ++k) {
        t.push_back(k * 1e-3);
        y.push_back(std::exp(-t.back()));
    }
    try {
        simulation::estimate_damping(t, y);
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("insufficient oscillation for log-decrement"), std::string::npos);
    }
}

TEST(EstimateDamping, GammaSweepOrderingAndEigenvalues) {
    const auto dev = support::calibrated_device();
    const auto spec = network::load_network(support::fig3_path());
    const auto reduced = network::kron_reduce(network::build_susceptance(spec));
    double previous = -1.0;
    for (double gamma : {0.02, 0.05, 0.10, 0.128}) {
        const auto augmented = network::attach_gfm(reduced, {gamma, 0.16});
        const auto model = dynamics::direct_full_model(dev, augmented);
        const auto r = simulation::simulate(model, simulation::default_disturbance("F1"));
        const auto est = simulation::estimate_damping(r);
        ASSERT_TRUE(est[0].estimate.has_value()) << est[0].note;
        const double zeta = est[0].estimate->zeta;
        EXPECT_GT(zeta, previous);
        previous = zeta;
        const double eig_zeta = dynamics::damping_ratio(support::dominant(dynamics::eigenvalues(model.a)));
        EXPECT_NEAR(zeta, eig_zeta, 0.1 * std::abs(eig_zeta)) << "gamma " << gamma;
    }
}

TEST(Outputs, CsvAndMetadata) {
    auto dist = simulation::default_disturbance("F1");
    const auto r = simulation::simulate(fig3_model(0.128), dist, 0.003, 1e-3);
    const std::string csv = simulation::traces_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t_s,farm_F1_dP_pu,farm_F2_dP_pu,farm_F3_dP_pu,farm_F4_dP_pu");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
    simulation::RunMetadata meta;
    meta.gamma = 0.128;
    const std::string json = simulation::metadata_json(r, meta);
    EXPECT_NE(json.find("\"gamma\": 0.128"), std::string::npos);
    EXPECT_NE(json.find("\"setpoint_step\""), std::string::npos);
    EXPECT_EQ(json, simulation::metadata_json(r, meta));
}
