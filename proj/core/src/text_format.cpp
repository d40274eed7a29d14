#include "gridstrength/text_format.hpp"

#include "gridstrength/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

namespace gridstrength::text {

std::string format_exact(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw Error("format_exact: conversion failed");
    }
    return std::string(buf.data(), ptr);
}

std::string format_sig6(double value) {
    if (!std::isfinite(value)) {
        return format_exact(value);
    }
    if (value == 0.0) {
        return "0";  // avoids "-0"
    }
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::general, 6);
    if (ec != std::errc{}) {
        throw Error("format_sig6: conversion failed");
    }
    return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw InputError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) {
        throw InputError(std::string(what) + ": value must be finite");
    }
    return value;
}

}  // namespace gridstrength::text
