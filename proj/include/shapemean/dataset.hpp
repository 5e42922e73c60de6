#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "shapemean/curves.hpp"

namespace shapemean {

/// Ingested batch of polygons with optional per-curve feature labels.
struct Dataset {
  std::vector<PlanePolygon> curves;
  std::vector<std::map<std::string, std::string>> features;  // parallel
  std::vector<std::string> feature_keys;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(curves.size()); }
};

/// CSV columns `curve_id,x,y[,feature...]` (header optional when no feature
/// columns are present), points in traversal order, one curve per contiguous
/// id block.
Dataset ingest_csv(std::istream& in);

/// JSON array of {"id": ..., "points": [[x, y], ...], "features": {...}}.
Dataset ingest_json(std::istream& in);

/// Dispatches on the file extension (.csv vs .json).
Dataset ingest(const std::string& path);

/// Serializes back to the JSON input format (used by `simulate`).
std::string to_json(const Dataset& dataset);

}  // namespace shapemean
