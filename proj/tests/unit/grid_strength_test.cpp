#include "gridstrength/errors.hpp"
#include "gridstrength/grid_strength.hpp"
#include "gridstrength/network_model.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gridstrength;

namespace {

network::KronReducedNetwork reduced_of(const network::NetworkSpec& spec) {
    return network::kron_reduce(network::build_susceptance(spec));
}

network::KronReducedNetwork make_reduced(const Eigen::MatrixXd& b, const Eigen::VectorXd& s) {
    network::KronReducedNetwork r;
    r.b_r = b;
    r.s_b = s;
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        r.farm_ids.push_back("F" + std::to_string(i + 1));
    }
    return r;
}

}  // namespace

TEST(ComputeModes, Scalar) {
    const auto modes = strength::compute_modes(make_reduced(Eigen::MatrixXd::Constant(1, 1, 2.0),
                                                            Eigen::VectorXd::Constant(1, 0.5)));
    EXPECT_DOUBLE_EQ(modes.lambdas(0), 4.0);
}

TEST(ComputeModes, TwoByTwoByHand) {
    Eigen::Matrix2d b;
    b << 4.0, -1.0, -1.0, 1.0;
    const auto modes = strength::compute_modes(make_reduced(b, Eigen::Vector2d::Ones()));
    EXPECT_NEAR(modes.lambdas(0), (5.0 - std::sqrt(13.0)) / 2.0, 1e-12);
    EXPECT_NEAR(modes.lambdas(1), (5.0 + std::sqrt(13.0)) / 2.0, 1e-12);
}

TEST(ComputeModes, Fig3Gscr) {
    const auto reduced = reduced_of(network::load_network(support::fig3_path()));
    EXPECT_NEAR(strength::gscr(reduced), 1.2, 1e-3);
    const auto augmented = network::attach_gfm(reduced, {0.128, 0.16});
    EXPECT_NEAR(strength::gscr(augmented), 2.0, 1e-3);
}

TEST(ComputeModes, SmibIsClassicalScr) {
    const auto reduced = reduced_of(network::load_network(support::smib_path()));
    EXPECT_DOUBLE_EQ(strength::gscr(reduced), 2.0);
}

TEST(ComputeModes, EigenvectorContract) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const auto reduced = reduced_of(support::random_network(rng));
        const auto modes = strength::compute_modes(reduced);
        const Eigen::MatrixXd op = reduced.s_b.cwiseInverse().asDiagonal() * reduced.b_r;
        for (Eigen::Index k = 0; k < modes.lambdas.size(); ++k) {
            const auto v = modes.vectors.col(k);
            EXPECT_NEAR(v.norm(), 1.0, 1e-12);
            EXPECT_LE((op * v - modes.lambdas(k) * v).norm(), 1e-8);
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                if (v(i) != 0.0) {
                    EXPECT_GT(v(i), 0.0);
                    break;
                }
            }
            if (k > 0) {
                EXPECT_LE(modes.lambdas(k - 1), modes.lambdas(k));
            }
        }
        EXPECT_GT(modes.lambdas(0), 0.0);
    }
}

TEST(ComputeModes, MatchesGeneralEigensolver) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const auto reduced = reduced_of(support::random_network(rng));
        const auto modes = strength::compute_modes(reduced);
        const Eigen::VectorXd oracle = support::general_eigenvalues(reduced.b_r, reduced.s_b);
        for (Eigen::Index k = 0; k < oracle.size(); ++k) {
            EXPECT_NEAR(modes.lambdas(k), oracle(k), 1e-8 * std::max(1.0, oracle(k)));
        }
    }
}

TEST(ComputeModes, RejectsAsymmetry) {
    Eigen::Matrix2d b;
    b << 4.0, -1.0, -1.1, 1.0;
    EXPECT_THROW(strength::compute_modes(make_reduced(b, Eigen::Vector2d::Ones())), NumericalError);
}

TEST(ComputeModes, ScaleInvariance) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto spec = support::random_network(rng);
        auto nodes = spec.nodes();
        for (auto& n : nodes) {
            n.capacity_mva *= 3.7;
        }
        const auto scaled = network::make_network_spec(spec.s_global_mva() * 3.7, nodes, spec.branches());
        EXPECT_NEAR(strength::gscr(reduced_of(scaled)), strength::gscr(reduced_of(spec)), 1e-10);
    }
}

TEST(PredictGscr, Fig3ToTargetTwo) {
    EXPECT_NEAR(strength::predict_gscr(1.2, 0.128, 0.16), 2.0, 1e-12);
    EXPECT_NEAR(strength::predict_gscr(1.2, 0.064, 0.08), 2.0, 1e-12);
    EXPECT_EQ(strength::predict_gscr(1.37, 0.0, 0.2), 1.37);
    EXPECT_THROW(strength::predict_gscr(1.2, 0.1, 0.0), InputError);
}

TEST(SizeGamma, Fig3ToTargetTwo) {
    EXPECT_NEAR(strength::size_gamma(1.2, 2.0, 0.16).gamma, 0.128, 1e-12);
    EXPECT_NEAR(strength::size_gamma(1.2, 2.0, 0.08).gamma, 0.064, 1e-12);
    const auto done = strength::size_gamma(2.5, 2.0, 0.16);
    EXPECT_EQ(done.gamma, 0.0);
    EXPECT_TRUE(done.already_satisfied);
}

TEST(SizeGamma, RoundTrip) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> g(0.2, 5.0), z(0.02, 0.5);
    for (int i = 0; i < 1000; ++i) {
        const double g0 = g(rng), target = g(rng), zl = z(rng);
        const double gamma = strength::size_gamma(g0, target, zl).gamma;
        EXPECT_GE(gamma, 0.0);
        EXPECT_NEAR(strength::predict_gscr(g0, gamma, zl), std::max(target, g0), 1e-12);
    }
}

TEST(TerminalScr, Fig3Endpoints) {
    EXPECT_NEAR(strength::terminal_scr_to_gscr(1.0, 1.0 / 6.0), 1.2, 1e-12);
    EXPECT_NEAR(strength::terminal_scr_to_gscr(1.5, 1.0 / 6.0), 2.0, 1e-12);
    EXPECT_NEAR(strength::terminal_scr_to_gscr(1.5, 0.16), 1.974, 1e-3);
    EXPECT_EQ(strength::terminal_scr_to_gscr(2.3, 0.0), 2.3);
    EXPECT_THROW(strength::terminal_scr_to_gscr(2.0, 0.5), InputError);
    EXPECT_THROW(strength::terminal_scr_to_gscr(2.0, 0.6), InputError);
}

TEST(PlanUnits, Fig3Capacities) {
    const std::vector<double> caps = {50, 100, 150, 50};
    const auto plan = strength::plan_gfm_units(caps, 0.128, 5.0);
    EXPECT_EQ(plan.counts, (std::vector<long long>{2, 3, 4, 2}));
    const auto none = strength::plan_gfm_units(caps, 0.0, 5.0);
    EXPECT_EQ(none.counts, (std::vector<long long>{0, 0, 0, 0}));
}

TEST(PlanUnits, ExactDivision) {
    const std::vector<double> caps = {100};
    const auto plan = strength::plan_gfm_units(caps, 0.128, 12.8, 1.2, 0.16);
    EXPECT_EQ(plan.counts, (std::vector<long long>{1}));
    EXPECT_NEAR(plan.realized_gamma[0], 0.128, 1e-15);
    ASSERT_TRUE(plan.predicted_gscr.has_value());
    EXPECT_NEAR(*plan.predicted_gscr, 2.0, 1e-12);
}

TEST(PlanUnits, RealizedNeverBelowRequest) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> cap(1.0, 500.0), gamma(0.0, 0.5), unit(0.5, 50.0);
    for (int i = 0; i < 2000; ++i) {
        const std::vector<double> caps = {cap(rng), cap(rng), cap(rng)};
        const double g = gamma(rng);
        const auto plan = strength::plan_gfm_units(caps, g, unit(rng));
        for (double r : plan.realized_gamma) {
            EXPECT_GE(r, g * (1.0 - 1e-12));
        }
    }
}

TEST(SizeNetwork, Fig3) {
    const auto spec = network::load_network(support::fig3_path());
    const auto caps = spec.farm_capacities_mva();
    const auto result = strength::size_network(reduced_of(spec), caps, 2.0, 0.16, 5.0);
    EXPECT_NEAR(result.gamma_required, 0.128, 1e-5);
    EXPECT_NEAR(result.verified_gscr, 2.0, 1e-10);
    EXPECT_GE(strength::predict_gscr(result.gscr0, result.gamma_required, 0.16), 2.0 - 1e-12);
    ASSERT_TRUE(result.units.has_value());
    EXPECT_EQ(result.units->counts, (std::vector<long long>{2, 3, 4, 2}));
    ASSERT_TRUE(result.verified_gscr_with_units.has_value());
    EXPECT_GE(*result.verified_gscr_with_units, *result.units->predicted_gscr - 1e-12);
}

TEST(SizingLaw, UniformShiftOfEveryMode) {
    for (const auto& spec : support::corpus()) {
        const auto reduced = reduced_of(spec);
        const auto base = strength::compute_modes(reduced);
        for (int step = 0; step <= 10; ++step) {
            const double gamma = 0.02 * step;
            const auto shifted = strength::compute_modes(network::attach_gfm(reduced, {gamma, 0.16}));
            for (Eigen::Index k = 0; k < base.lambdas.size(); ++k) {
                EXPECT_NEAR(shifted.lambdas(k) - base.lambdas(k), gamma / 0.16, 1e-9);
            }
            EXPECT_NEAR(shifted.gscr(), strength::predict_gscr(base.gscr(), gamma, 0.16),
                        1e-8 * shifted.gscr());
        }
    }
}
