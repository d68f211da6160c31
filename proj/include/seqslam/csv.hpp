#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace seqslam {

/// Fixed real formatting for every CSV the tools emit: 6 significant digits
/// (printf "%.6g"), "inf"/"-inf"/"nan" for non-finite values.
std::string format_real(double v);

/// Splits one CSV line on commas. Fields are trimmed of surrounding blanks;
/// quoting is not supported.
std::vector<std::string> split_csv(std::string_view line);

/// Parses a real field, accepting "inf", "-inf" and "nan".
double parse_real(const std::string& field);

std::string trim(std::string_view s);

} // namespace seqslam
