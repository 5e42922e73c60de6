#include "shapemean/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shapemean/errors.hpp"

namespace shapemean {

namespace {

nlohmann::json complex_to_json(Complex z) {
  return nlohmann::json::array({z.real(), z.imag()});
}

nlohmann::json complex_vector_to_json(const Eigen::VectorXcd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

nlohmann::json real_vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

nlohmann::json result_to_json(const ElasticMeanResult& result) {
  nlohmann::json mean;
  mean["basis"] = {{"order", result.basis->order()},
                   {"knots", result.basis->num_knots()}};
  mean["theta"] = complex_vector_to_json(result.theta);
  nlohmann::json polyline = nlohmann::json::array();
  for (const Complex& p : result.mean_polyline)
    polyline.push_back(complex_to_json(p));
  mean["polyline"] = std::move(polyline);
  mean["eigenvalues"] = real_vector_to_json(result.eigen.values);
  mean["sigma_sq"] = result.sigma_sq;
  mean["nugget"] = result.fit.nugget.size() > 0 ? result.fit.nugget_value(0.5)
                                                : 0.0;
  mean["eta_re"] = result.fit.eta_re;
  mean["eta_im"] = result.fit.eta_im;
  mean["iterations"] = result.iterations;
  mean["converged"] = result.converged;
  mean["step_norms"] = result.step_norms;
  mean["lambda1_trace"] = result.lambda1_trace;

  nlohmann::json curves = nlohmann::json::array();
  for (const CurveState& st : result.curves) {
    nlohmann::json c;
    c["id"] = st.id;
    c["rotation"] = complex_to_json(st.rotation);
    c["length"] = st.length;
    c["flagged"] = st.flagged;
    c["collapsed"] = st.collapsed;
    c["times"] = real_vector_to_json(st.srv.times);
    c["nodes"] = real_vector_to_json(st.srv.nodes);
    c["values"] = complex_vector_to_json(st.srv.values);
    curves.push_back(std::move(c));
  }

  nlohmann::json out;
  out["mean"] = std::move(mean);
  out["curves"] = std::move(curves);
  return out;
}

nlohmann::json variance_to_json(const VarianceDecomposition& decomposition) {
  nlohmann::json groups = nlohmann::json::array();
  for (const GroupVariance& g : decomposition.groups)
    groups.push_back({{"level", g.level},
                      {"count", g.count},
                      {"sigma_sq", g.sigma_sq}});
  return {{"total_sigma_sq", decomposition.total_sigma_sq},
          {"groups", std::move(groups)},
          {"levels_x", decomposition.levels_x},
          {"levels_a2", decomposition.levels_a2},
          {"r_squared", decomposition.r_squared}};
}

std::string render_svg(const ElasticMeanResult& result) {
  // gather aligned input polylines (reconstructed from the final SRV states)
  std::vector<std::vector<Complex>> inputs;
  for (const CurveState& st : result.curves) {
    std::vector<double> grid(st.srv.nodes.data(),
                             st.srv.nodes.data() + st.srv.nodes.size());
    inputs.push_back(srv_to_curve(st.srv, grid));
  }

  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
  auto extend = [&](const std::vector<Complex>& pts) {
    for (const Complex& p : pts) {
      min_x = std::min(min_x, p.real());
      max_x = std::max(max_x, p.real());
      min_y = std::min(min_y, -p.imag());  // SVG y axis points down
      max_y = std::max(max_y, -p.imag());
    }
  };
  extend(result.mean_polyline);
  for (const auto& pts : inputs) extend(pts);
  const double pad = 0.05 * std::max(max_x - min_x, max_y - min_y) + 0.01;

  std::ostringstream svg;
  svg.setf(std::ios::fixed);
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
      << min_x - pad << " " << min_y - pad << " "
      << (max_x - min_x) + 2 * pad << " " << (max_y - min_y) + 2 * pad
      << "\">\n";
  auto polyline = [&](const std::vector<Complex>& pts, const char* stroke,
                      double width) {
    svg << "  <polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"" << width << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) svg << " ";
      svg << pts[i].real() << "," << -pts[i].imag();
    }
    svg << "\"/>\n";
  };
  for (const auto& pts : inputs) polyline(pts, "#999999", 0.004);
  polyline(result.mean_polyline, "#000000", 0.01);
  svg << "</svg>\n";
  return svg.str();
}

bool validate_report(const nlohmann::json& report, std::string* error) {
  auto fail = [&](const std::string& msg) {
    if (error) *error = msg;
    return false;
  };
  if (!report.is_object()) return fail("report must be an object");
  for (const char* key : {"command", "config", "warnings"})
    if (!report.contains(key)) return fail(std::string("missing '") + key + "'");
  if (!report["command"].is_string()) return fail("'command' must be a string");
  if (!report["config"].is_object()) return fail("'config' must be an object");
  if (!report["warnings"].is_array()) return fail("'warnings' must be an array");
  const std::string command = report["command"].get<std::string>();
  if (command == "mean" || command == "inelastic") {
    if (!report.contains("mean") || !report["mean"].is_object())
      return fail("missing 'mean' object");
    const auto& mean = report["mean"];
    for (const char* key :
         {"basis", "theta", "polyline", "eigenvalues", "sigma_sq",
          "iterations", "converged"})
      if (!mean.contains(key))
        return fail(std::string("mean: missing '") + key + "'");
    if (!report.contains("curves") || !report["curves"].is_array())
      return fail("missing 'curves' array");
    for (const auto& c : report["curves"])
      for (const char* key : {"id", "rotation", "length", "times", "values"})
        if (!c.contains(key))
          return fail(std::string("curve: missing '") + key + "'");
  } else if (command == "distance") {
    if (!report.contains("distance") || !report["distance"].is_object())
      return fail("missing 'distance' object");
    for (const char* key : {"id1", "id2", "elastic", "inelastic"})
      if (!report["distance"].contains(key))
        return fail(std::string("distance: missing '") + key + "'");
  } else if (command == "variance") {
    if (!report.contains("variance") || !report["variance"].is_object())
      return fail("missing 'variance' object");
    for (const char* key :
         {"total_sigma_sq", "groups", "levels_x", "levels_a2", "r_squared"})
      if (!report["variance"].contains(key))
        return fail(std::string("variance: missing '") + key + "'");
  } else if (command == "simulate") {
    if (!report.contains("simulate") || !report["simulate"].is_object())
      return fail("missing 'simulate' object");
  } else {
    return fail("unknown command '" + command + "'");
  }
  return true;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << content;
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace shapemean
