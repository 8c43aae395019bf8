#pragma once

// Locale-independent number formatting shared by the file writers.

#include <optional>
#include <string>
#include <string_view>

namespace fidtrack {

/// Shortest "%.17g"-style text; parses back to the identical double.
std::string format_double(double v);

/// Strict decimal parse of the whole field. Rejects empty input, trailing
/// characters, NaN and infinities.
std::optional<double> parse_double(std::string_view text);

std::optional<unsigned long long> parse_unsigned(std::string_view text);

}  // namespace fidtrack
