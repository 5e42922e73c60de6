#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "shapemean/mean.hpp"

namespace shapemean {

/// ElasticMeanResult -> report.json "mean"/"curves" sections.
nlohmann::json result_to_json(const ElasticMeanResult& result);

nlohmann::json variance_to_json(const VarianceDecomposition& decomposition);

/// Mean curve overlaid on the aligned, unit-scaled input polylines (SVG 1.1
/// subset: path, polyline, circle, text).
std::string render_svg(const ElasticMeanResult& result);

/// Structural check mirroring docs/schema.json; returns false and fills
/// `error` on the first violation.
bool validate_report(const nlohmann::json& report, std::string* error);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace shapemean
