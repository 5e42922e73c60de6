#include "shapemean/dataset.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "shapemean/errors.hpp"

namespace shapemean {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, int line, int column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ParseError("line " + std::to_string(line) + ", column " +
                     std::to_string(column) + ": '" + s + "' is not a number");
  return v;
}

// merge duplicate consecutive points and reject curves with < 3 points
void finalize(Dataset& dataset) {
  std::vector<std::string> too_few;
  for (auto& poly : dataset.curves) {
    std::vector<Complex> merged;
    merged.reserve(poly.points.size());
    int dropped = 0;
    for (const Complex& p : poly.points) {
      if (!merged.empty() && p == merged.back())
        ++dropped;
      else
        merged.push_back(p);
    }
    if (dropped > 0) {
      dataset.warnings.push_back("curve '" + poly.id + "': merged " +
                                 std::to_string(dropped) +
                                 " duplicate consecutive point(s)");
      poly.points = std::move(merged);
    }
    if (static_cast<int>(poly.points.size()) < 3) too_few.push_back(poly.id);
  }
  if (!too_few.empty()) {
    std::string msg = "curves with fewer than 3 points:";
    for (const auto& id : too_few) msg += " '" + id + "'";
    throw TooFewPoints(msg);
  }
}

}  // namespace

Dataset ingest_csv(std::istream& in) {
  Dataset dataset;
  std::string line;
  int line_no = 0;
  std::vector<std::string> feature_keys;
  bool have_header = false;
  std::set<std::string> seen;  // closed curve ids

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "curve_id") {
      if (fields.size() < 3 || fields[1] != "x" || fields[2] != "y")
        throw ParseError("line 1: header must start with curve_id,x,y");
      feature_keys.assign(fields.begin() + 3, fields.end());
      have_header = true;
      continue;
    }
    const std::size_t expected = have_header ? 3 + feature_keys.size() : 3;
    if (fields.size() != expected)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(expected) + " columns, got " +
                       std::to_string(fields.size()));
    const std::string& id = fields[0];
    if (dataset.curves.empty() || dataset.curves.back().id != id) {
      if (seen.count(id))
        throw DuplicateId("curve id '" + id + "' appears in separate blocks");
      if (!dataset.curves.empty()) seen.insert(dataset.curves.back().id);
      dataset.curves.push_back({id, {}});
      std::map<std::string, std::string> feats;
      for (std::size_t k = 0; k < feature_keys.size(); ++k)
        feats[feature_keys[k]] = fields[3 + k];
      dataset.features.push_back(std::move(feats));
    } else {
      for (std::size_t k = 0; k < feature_keys.size(); ++k)
        if (dataset.features.back()[feature_keys[k]] != fields[3 + k])
          throw ParseError("line " + std::to_string(line_no) +
                           ": inconsistent feature '" + feature_keys[k] +
                           "' for curve '" + id + "'");
    }
    dataset.curves.back().points.emplace_back(
        parse_number(fields[1], line_no, 2), parse_number(fields[2], line_no, 3));
  }
  dataset.feature_keys = std::move(feature_keys);
  finalize(dataset);
  return dataset;
}

Dataset ingest_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("top-level JSON value must be an array");

  Dataset dataset;
  std::set<std::string> ids;
  std::set<std::string> keys;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    if (!entry.is_object() || !entry.contains("id") ||
        !entry.contains("points"))
      throw ParseError("entry " + std::to_string(i) +
                       ": expected object with 'id' and 'points'");
    PlanePolygon poly;
    poly.id = entry["id"].get<std::string>();
    if (!ids.insert(poly.id).second)
      throw DuplicateId("curve id '" + poly.id + "' appears twice");
    for (const auto& pt : entry["points"]) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() ||
          !pt[1].is_number())
        throw ParseError("curve '" + poly.id +
                         "': points must be [x, y] pairs");
      poly.points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
    std::map<std::string, std::string> feats;
    if (entry.contains("features")) {
      for (const auto& [k, v] : entry["features"].items()) {
        feats[k] = v.is_string() ? v.get<std::string>() : v.dump();
        keys.insert(k);
      }
    }
    dataset.curves.push_back(std::move(poly));
    dataset.features.push_back(std::move(feats));
  }
  dataset.feature_keys.assign(keys.begin(), keys.end());
  finalize(dataset);
  return dataset;
}

Dataset ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file '" + path + "'");
  const auto dot = path.find_last_of('.');
  const std::string ext = (dot == std::string::npos) ? "" : path.substr(dot);
  if (ext == ".json") return ingest_json(in);
  if (ext == ".csv") return ingest_csv(in);
  throw ParseError("unsupported input extension '" + ext +
                   "' (expected .csv or .json)");
}

std::string to_json(const Dataset& dataset) {
  nlohmann::json doc = nlohmann::json::array();
  for (int i = 0; i < dataset.size(); ++i) {
    nlohmann::json entry;
    entry["id"] = dataset.curves[i].id;
    entry["points"] = nlohmann::json::array();
    for (const Complex& p : dataset.curves[i].points)
      entry["points"].push_back({p.real(), p.imag()});
    if (!dataset.features[i].empty()) entry["features"] = dataset.features[i];
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

}  // namespace shapemean
