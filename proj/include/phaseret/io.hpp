#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "phaseret/measurement.hpp"
#include "phaseret/poly.hpp"

namespace phaseret::io {

using json = nlohmann::ordered_json;

// Any malformed or schema-violating input file surfaces as FormatError.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline double as_finite_double(const json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FormatError(std::string(what) + ": value must be finite");
  return v;
}

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw FormatError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

}  // namespace detail

// Polynomial file: {"n": N, "coeffs": [[re, im], ...]} with exactly n pairs.
inline json to_json(const Polynomial& p) {
  json j;
  j["n"] = p.n();
  json coeffs = json::array();
  for (const Complex& c : p.coeffs()) coeffs.push_back({c.real(), c.imag()});
  j["coeffs"] = std::move(coeffs);
  return j;
}

inline Polynomial polynomial_from_json(const json& j) {
  const json& jn = detail::require(j, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 1)
    throw FormatError("\"n\" must be a positive integer");
  const auto n = jn.get<std::size_t>();
  const json& jc = detail::require(j, "coeffs");
  if (!jc.is_array() || jc.size() != n)
    throw FormatError("\"coeffs\" must be an array of length n");
  std::vector<Complex> coeffs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const json& pair = jc.at(k);
    if (!pair.is_array() || pair.size() != 2)
      throw FormatError("coefficient entries must be [re, im] pairs");
    coeffs[k] = Complex(detail::as_finite_double(pair.at(0), "coeffs"),
                        detail::as_finite_double(pair.at(1), "coeffs"));
  }
  return Polynomial(std::move(coeffs));
}

// Node file: {"angles": [t0, t1, ...]}.
inline json to_json(const NodeSet& nodes) {
  json j;
  j["angles"] = nodes.angles;
  return j;
}

inline NodeSet nodeset_from_json(const json& j) {
  const json& ja = detail::require(j, "angles");
  if (!ja.is_array()) throw FormatError("\"angles\" must be an array");
  std::vector<double> angles;
  angles.reserve(ja.size());
  for (const json& v : ja) angles.push_back(detail::as_finite_double(v, "angles"));
  try {
    return NodeSet(std::move(angles));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

// Measurement file. The uniform-node form is
//   {"n": N, "intensities_p": [...], "intensities_dp": [...]}
// and the generalized form additionally embeds its node angles as
//   "nodes_w": {"angles": [...]}, "nodes_z": {"angles": [...]}.
// Absent node fields mean the roots-of-unity default.
struct MeasurementFile {
  std::size_t n = 2;
  std::vector<double> intensities_p;
  std::vector<double> intensities_dp;
  std::optional<NodeSet> nodes_w;
  std::optional<NodeSet> nodes_z;

  bool is_generalized() const { return nodes_w.has_value(); }

  MeasurementSet to_uniform() const {
    return MeasurementSet(n, intensities_p, intensities_dp);
  }

  GeneralizedMeasurementSet to_generalized() const {
    GeneralizedMeasurementSet gm;
    gm.n = n;
    gm.nodes_w = *nodes_w;
    gm.nodes_z = *nodes_z;
    gm.intensities_p = intensities_p;
    gm.intensities_dp = intensities_dp;
    return gm;
  }
};

inline json to_json(const MeasurementSet& ms) {
  json j;
  j["n"] = ms.n;
  j["intensities_p"] = ms.intensities_p;
  j["intensities_dp"] = ms.intensities_dp;
  return j;
}

inline json to_json(const GeneralizedMeasurementSet& gm) {
  json j;
  j["n"] = gm.n;
  j["intensities_p"] = gm.intensities_p;
  j["intensities_dp"] = gm.intensities_dp;
  j["nodes_w"] = to_json(gm.nodes_w);
  j["nodes_z"] = to_json(gm.nodes_z);
  return j;
}

inline MeasurementFile measurement_from_json(const json& j) {
  MeasurementFile mf;
  const json& jn = detail::require(j, "n");
  if (!jn.is_number_integer() || jn.get<long long>() < 2)
    throw FormatError("\"n\" must be an integer >= 2");
  mf.n = jn.get<std::size_t>();

  auto read_intensities = [&](const char* key, std::size_t expected) {
    const json& ja = detail::require(j, key);
    if (!ja.is_array() || ja.size() != expected)
      throw FormatError(std::string("\"") + key + "\" must be an array of length " +
                        std::to_string(expected));
    std::vector<double> out;
    out.reserve(expected);
    for (const json& v : ja) {
      const double x = detail::as_finite_double(v, key);
      if (x < 0.0) throw FormatError(std::string("\"") + key + "\" entries must be nonnegative");
      out.push_back(x);
    }
    return out;
  };
  mf.intensities_p = read_intensities("intensities_p", 2 * mf.n - 1);
  mf.intensities_dp = read_intensities("intensities_dp", 2 * mf.n - 3);

  const bool has_w = j.contains("nodes_w");
  const bool has_z = j.contains("nodes_z");
  if (has_w != has_z)
    throw FormatError("generalized measurement files need both \"nodes_w\" and \"nodes_z\"");
  if (has_w) {
    mf.nodes_w = nodeset_from_json(j.at("nodes_w"));
    mf.nodes_z = nodeset_from_json(j.at("nodes_z"));
    if (mf.nodes_w->size() != 2 * mf.n - 1 || mf.nodes_z->size() != 2 * mf.n - 3)
      throw FormatError("node counts must be 2N-1 and 2N-3");
  }
  return mf;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write to " + path + " failed");
}

}  // namespace phaseret::io
