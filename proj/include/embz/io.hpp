#pragma once

// JSON (de)serialization. Complex entries are [re, im] pairs; matrices are
// row-major arrays of rows.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "embz/embezzle.hpp"
#include "embz/essspec.hpp"
#include "embz/hopping.hpp"
#include "embz/spectral.hpp"

namespace embz {

using json = nlohmann::ordered_json;

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw ValidationError(where + ": expected " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != dim) {
      throw ValidationError(where + ": row " + std::to_string(r) + " must have " + std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) {
      const auto& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw ValidationError(where + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                              ") must be [re, im]");
      }
      m(r, c) = cdouble(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline json model_to_json(const HoppingModel& model) {
  json coeffs = json::object();
  for (const auto& [x, hx] : model.coefficients) coeffs[std::to_string(x)] = matrix_to_json(hx);
  return json{{"bands", model.bands}, {"coefficients", coeffs}, {"name", model.name}};
}

inline HoppingModel model_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("model: top level must be an object");
  if (!j.contains("bands") || !j["bands"].is_number_integer()) {
    throw ValidationError("model.bands: required positive integer");
  }
  HoppingModel m;
  m.bands = j["bands"].get<int>();
  if (m.bands < 1) throw ValidationError("model.bands: must be positive");
  m.name = j.value("name", std::string{});
  if (j.contains("coefficients")) {
    const auto& c = j["coefficients"];
    if (!c.is_object()) throw ValidationError("model.coefficients: must be an object keyed by offset");
    for (auto it = c.begin(); it != c.end(); ++it) {
      int offset = 0;
      std::size_t used = 0;
      try {
        offset = std::stoi(it.key(), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != it.key().size()) {
        throw ValidationError("model.coefficients: key '" + it.key() + "' is not a decimal integer offset");
      }
      m.coefficients[offset] = matrix_from_json(it.value(), m.bands, "model.coefficients[" + it.key() + "]");
    }
  }
  validate(m);
  return m;
}

inline HoppingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("model: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("model: '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

inline json discontinuity_to_json(const Discontinuity& d) {
  return json{{"k0", d.location},
              {"jump_size", d.jump_size},
              {"left", matrix_to_json(d.left_limit)},
              {"right", matrix_to_json(d.right_limit)}};
}

inline json essential_spectrum_to_json(const EssentialSpectrumSet& ess) {
  json iv = json::array();
  for (const auto& i : ess.intervals) iv.push_back({i.lo, i.hi});
  return json{{"intervals", iv}, {"points", ess.points}};
}

inline json hs_verdict_to_json(const HsVerdict& v) {
  return json{{"verdict", to_string(v.kind)},  {"slope", v.slope},
              {"intercept", v.intercept},      {"r_squared", v.r_squared},
              {"tail_increment", v.tail_increment}, {"checkpoints", v.checkpoints},
              {"note", v.note}};
}

inline json decay_evidence_to_json(const SectionDecayEvidence& ev) {
  json sums = json::array();
  for (const auto& [n, s] : ev.sums) sums.push_back({{"N", n}, {"sum_min_lambda", s}});
  return json{{"sums", sums}, {"drift", ev.drift}, {"bounded", ev.bounded}};
}

/// 17 significant digits, so the text round-trips to the same double.
inline std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace embz
