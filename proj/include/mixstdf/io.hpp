#pragma once

// CSV and JSON serialisation of samples, parameters and reports.

#include "mixstdf/directions.hpp"
#include "mixstdf/estimate.hpp"

#include <json.hpp>

#include <Eigen/Core>

#include <string>
#include <vector>

namespace mixstdf {

using Json = nlohmann::ordered_json;

/// Round-trip safe decimal rendering (%.17g).
std::string format_double(double v);

/// Numeric CSV; a first line that does not parse as numbers is treated as a header.
Eigen::MatrixXd read_csv(const std::string& path);
void write_csv(const std::string& path, const Eigen::MatrixXd& M, const std::vector<std::string>& header = {});

std::string signature_label(const Signature& s);  // 1-based, e.g. "{1,3,4}"

/// {family, d, r, A (row-major), alpha | Gamma}. alpha is a number (shared)
/// or a list of r numbers; Gamma is a d x d nested list (shared) or a list of r of them.
Json params_to_json(const MixtureParams& theta);
MixtureParams params_from_json(const Json& j);

Json fit_report_to_json(const FitReport& rep);
Json direction_report_to_json(const DirectionReport& rep);

Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace mixstdf
