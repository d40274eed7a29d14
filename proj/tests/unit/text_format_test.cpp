#include "gridstrength/errors.hpp"
#include "gridstrength/text_format.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gridstrength;

TEST(TextFormat, Sig6) {
    EXPECT_EQ(text::format_sig6(1.2000015), "1.2");
    EXPECT_EQ(text::format_sig6(12.799976), "12.8");
    EXPECT_EQ(text::format_sig6(1.65521140856), "1.65521");
    EXPECT_EQ(text::format_sig6(0.0), "0");
    EXPECT_EQ(text::format_sig6(-500.0), "-500");
}

TEST(TextFormat, ExactRoundTrips) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 10000; ++i) {
        const double x = std::ldexp(mant(rng), expo(rng));
        EXPECT_EQ(text::parse_double(text::format_exact(x), "x"), x);
    }
    EXPECT_EQ(text::format_exact(0.1), "0.1");
}

TEST(TextFormat, ParseRejectsLocaleAndGarbage) {
    EXPECT_EQ(text::parse_double(" +2.5 ", "x"), 2.5);
    EXPECT_EQ(text::parse_double("1e-3", "x"), 1e-3);
    EXPECT_THROW(text::parse_double("1,5", "x"), InputError);
    EXPECT_THROW(text::parse_double("abc", "x"), InputError);
    EXPECT_THROW(text::parse_double("nan", "x"), InputError);
    EXPECT_THROW(text::parse_double("inf", "x"), InputError);
    EXPECT_THROW(text::parse_double("", "x"), InputError);
}
