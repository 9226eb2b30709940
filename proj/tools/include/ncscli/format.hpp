#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ncs::cli {

/// Shortest text that parses back to the same double; "nan" for NaN.
std::string format_double(double value);

/// Full-string parse (decimal or scientific, "nan", "inf"); nullopt otherwise.
std::optional<double> parse_double(std::string_view text);

/// Rows separated by ';', entries by whitespace: "1 0; 0 1".
std::string format_matrix(const Eigen::MatrixXd& m);
std::optional<Eigen::MatrixXd> parse_matrix(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

}  // namespace ncs::cli
