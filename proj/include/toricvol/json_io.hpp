#pragma once

#include <string>

#include "json.hpp"

#include "toricvol/quadrature.hpp"
#include "toricvol/systems.hpp"

namespace toricvol {

using ordered_json = nlohmann::ordered_json;

/// {"field": "complex"|"real", "polynomials": [{"support": [[..]..],
///  "variance": [..]?}, ..]}. Variance defaults to ones.
SystemSpec parse_system(const ordered_json& j);
SystemSpec parse_system_file(const std::string& path);

/// {"p": [[a,b],..], "q": "full" | [[a,b],..]} with "inf"/"-inf" string
/// sentinels (or plain numbers) for unbounded ends.
Region parse_region(const ordered_json& j);
Region parse_region_file(const std::string& path);

ordered_json system_to_json(const SystemSpec& spec);
ordered_json region_to_json(const Region& region);

/// Shorthand "a,b;c,d" -> box intervals (one "a,b" pair per dimension).
std::vector<Interval> parse_box_arg(const std::string& arg);

Eigen::VectorXd parse_vector_arg(const std::string& arg);

}  // namespace toricvol
