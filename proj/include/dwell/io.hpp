#pragma once

// JSON encoding of the library types and input hashing for reports.

#include <openssl/evp.h>

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dwell/errors.hpp"
#include "dwell/linalg.hpp"
#include "dwell/polymat.hpp"
#include "dwell/sampled_data.hpp"
#include "dwell/synthesis.hpp"
#include "dwell/system.hpp"

namespace dwell::io {

using json = nlohmann::json;

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("sha256: cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, digest, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

// ---- reading with field paths in the diagnostics ----

inline const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw InputError("field '" + path + "': expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError("field '" + path + "." + key + "': missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw InputError("field '" + path + "': expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError("field '" + path + "': expected an integer");
  return j.get<int>();
}

inline Mat matrix(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError("field '" + path + "': expected an array of rows");
  if (j.empty()) return Mat();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) throw InputError("field '" + rp + "': ragged or non-array row");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

inline Mat optional_matrix(const json& j, const std::string& key, const std::string& path) {
  return j.contains(key) ? matrix(j[key], path + "." + key) : Mat();
}

inline Vec vector(const json& j, const std::string& path) {
  if (!j.is_array()) throw InputError("field '" + path + "': expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], path);
  return v;
}

// ---- writing ----

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const PiecewisePolyMat& p) {
  if (p.empty()) return nullptr;
  json pieces = json::array();
  for (const auto& piece : p.pieces()) {
    json coeffs = json::array();
    for (const auto& c : piece.coeffs()) coeffs.push_back(to_json(c));
    pieces.push_back({{"coeffs", coeffs}, {"symmetric", piece.symmetric()}});
  }
  return {{"breaks", p.breaks()}, {"pieces", pieces}};
}

inline PiecewisePolyMat piecewise_from_json(const json& j, const std::string& path) {
  const json& b = field(j, "breaks", path);
  if (!b.is_array()) throw InputError("field '" + path + ".breaks': expected an array");
  std::vector<double> breaks;
  for (const auto& x : b) breaks.push_back(number(x, path + ".breaks"));
  std::vector<PolyMat> pieces;
  const json& ps = field(j, "pieces", path);
  if (!ps.is_array()) throw InputError("field '" + path + ".pieces': expected an array");
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const std::string pp = path + ".pieces[" + std::to_string(k) + "]";
    const json& cs = field(ps[k], "coeffs", pp);
    if (!cs.is_array() || cs.empty()) throw InputError("field '" + pp + ".coeffs': expected a non-empty array");
    std::vector<Mat> coeffs;
    for (std::size_t i = 0; i < cs.size(); ++i) coeffs.push_back(matrix(cs[i], pp + ".coeffs"));
    const bool sym = ps[k].value("symmetric", true);
    pieces.emplace_back(std::move(coeffs), sym);
  }
  return PiecewisePolyMat(std::move(breaks), std::move(pieces));
}

inline json to_json(const DwellSpec& s) {
  return {{"mode", to_string(s.mode)}, {"T_min", s.t_min}, {"T_max", s.t_max}};
}

/// {"mode": ..., "T": x} or {"mode": "ranged", "T_min": a, "T_max": b}
inline DwellSpec dwell_from_json(const json& j, const std::string& path) {
  const json& m = field(j, "mode", path);
  if (!m.is_string()) throw InputError("field '" + path + ".mode': expected a string");
  const std::string mode = m.get<std::string>();
  auto single = [&]() {
    if (j.contains("T")) return number(j["T"], path + ".T");
    return number(field(j, "T_min", path), path + ".T_min");
  };
  if (mode == "periodic") return DwellSpec::periodic(single());
  if (mode == "minimum") return DwellSpec::minimum(single());
  if (mode == "maximum") return DwellSpec::maximum(single());
  if (mode == "ranged") {
    return DwellSpec::ranged(number(field(j, "T_min", path), path + ".T_min"),
                             number(field(j, "T_max", path), path + ".T_max"));
  }
  throw InputError("field '" + path + ".mode': unknown dwell mode '" + mode + "'");
}

inline json to_json(const Encoder& e) {
  if (e.kind == EncoderKind::sos) return {{"kind", "sos"}, {"degree", e.degree}, {"mult_degree", e.mult_degree}};
  return {{"kind", "discretization"}, {"segments", e.segments}};
}

inline Encoder encoder_from_json(const json& j, const std::string& path) {
  const json& k = field(j, "kind", path);
  if (!k.is_string()) throw InputError("field '" + path + ".kind': expected a string");
  const std::string kind = k.get<std::string>();
  if (kind == "sos") {
    const int d = j.contains("degree") ? integer(j["degree"], path + ".degree") : 4;
    const int md = j.contains("mult_degree") ? integer(j["mult_degree"], path + ".mult_degree") : -1;
    return Encoder::sos(d, md);
  }
  if (kind == "discretization") {
    return Encoder::discretization(j.contains("segments") ? integer(j["segments"], path + ".segments") : 28);
  }
  throw InputError("field '" + path + ".kind': expected \"sos\" or \"discretization\"");
}

inline json to_json(const Settings& s) {
  return {{"margin_threshold", s.margin_threshold},
          {"verify_grid", s.verify_grid},
          {"verify_tol", s.verify_tol},
          {"bisect_tol", s.bisect_tol},
          {"exact_grid", s.exact_grid},
          {"synthesis_margin_cap", s.synthesis_margin_cap},
          {"sdp",
           {{"feas_tol", s.sdp.feas_tol},
            {"gap_tol", s.sdp.gap_tol},
            {"bound_tol", s.sdp.bound_tol},
            {"max_iter", s.sdp.max_iter}}}};
}

inline json to_json(const std::vector<ConditionResidual>& rs) {
  json out = json::array();
  for (const auto& r : rs) {
    out.push_back({{"name", r.name}, {"min_residual", r.min_residual}, {"where", r.where}, {"pass", r.pass}});
  }
  return out;
}

inline json to_json(const Certificate& c) {
  return {{"theorem", c.theorem},
          {"spec", to_json(c.spec)},
          {"encoder", to_json(c.encoder)},
          {"feasible", c.feasible},
          {"margin", std::isfinite(c.margin) ? json(c.margin) : json(nullptr)},
          {"solver_status", c.solver_status},
          {"witness", to_json(c.witness)},
          {"residuals", to_json(c.residuals)},
          {"sdp_vars", c.sdp_vars},
          {"witness_vars", c.witness_vars},
          {"seconds", c.seconds}};
}

inline Certificate certificate_from_json(const json& j, const std::string& path) {
  Certificate c;
  const json& th = field(j, "theorem", path);
  if (!th.is_string()) throw InputError("field '" + path + ".theorem': expected a string");
  c.theorem = th.get<std::string>();
  const json& sp = field(j, "spec", path);
  c.spec = dwell_from_json(sp, path + ".spec");
  if (j.contains("encoder")) c.encoder = encoder_from_json(j["encoder"], path + ".encoder");
  c.feasible = j.value("feasible", false);
  if (j.contains("margin") && j["margin"].is_number()) c.margin = j["margin"].get<double>();
  const json& w = field(j, "witness", path);
  if (w.is_null()) throw InputError("field '" + path + ".witness': certificate has no witness");
  c.witness = piecewise_from_json(w, path + ".witness");
  return c;
}

inline json to_json(const Controller& c) {
  return {{"kind", to_string(c.kind)},
          {"feasible", c.feasible},
          {"margin", std::isfinite(c.margin) ? json(c.margin) : json(nullptr)},
          {"solver_status", c.solver_status},
          {"Uc", to_json(c.Uc)},
          {"S", to_json(c.S)},
          {"Ud", to_json(c.Ud)},
          {"Kd", to_json(c.Kd)},
          {"Tbar", c.t_bar},
          {"clamp", c.clamp},
          {"residuals", to_json(c.residuals)},
          {"sdp_vars", c.sdp_vars},
          {"seconds", c.seconds}};
}

inline Controller controller_from_json(const json& j, const std::string& path) {
  Controller c;
  const std::string kind = j.value("kind", std::string("synth-min-dwell"));
  c.kind = kind == "synth-periodic" ? SynthesisKind::periodic : SynthesisKind::min_dwell;
  c.t_bar = number(field(j, "Tbar", path), path + ".Tbar");
  c.clamp = j.value("clamp", true);
  c.S = piecewise_from_json(field(j, "S", path), path + ".S");
  c.n = c.S.rows();
  if (j.contains("Uc") && !j["Uc"].is_null()) {
    c.Uc = piecewise_from_json(j["Uc"], path + ".Uc");
    c.m_c = c.Uc.rows();
  }
  c.Ud = j.contains("Ud") ? matrix(j["Ud"], path + ".Ud") : Mat();
  c.Kd = j.contains("Kd") ? matrix(j["Kd"], path + ".Kd") : Mat();
  if (c.Kd.size() == 0) c.Kd = Mat::Zero(0, c.n);
  c.feasible = j.value("feasible", false);
  return c;
}

inline json to_json(const SampledGain& g) {
  return {{"feasible", g.feasible},
          {"margin", std::isfinite(g.margin) ? json(g.margin) : json(nullptr)},
          {"solver_status", g.solver_status},
          {"K1", to_json(g.K1)},
          {"K2", to_json(g.K2)},
          {"S", to_json(g.S)},
          {"worst_rho", std::isfinite(g.worst_rho) ? json(g.worst_rho) : json(nullptr)},
          {"worst_theta", g.worst_theta},
          {"verified", g.verified},
          {"bibo_warning", g.bibo_warning},
          {"sdp_vars", g.sdp_vars},
          {"seconds", g.seconds}};
}

inline ImpulsiveSystem impulsive_from_json(const json& j, const std::string& path) {
  ImpulsiveSystem s;
  s.A = matrix(field(j, "A", path), path + ".A");
  s.J = matrix(field(j, "J", path), path + ".J");
  s.Bc = optional_matrix(j, "Bc", path);
  s.Bd = optional_matrix(j, "Bd", path);
  s.validate();
  return s;
}

inline json to_json(const ImpulsiveSystem& s) {
  json j = {{"A", to_json(s.A)}, {"J", to_json(s.J)}};
  if (s.has_bc()) j["Bc"] = to_json(s.Bc);
  if (s.has_bd()) j["Bd"] = to_json(s.Bd);
  return j;
}

/// Line and column of a byte offset, for parse diagnostics.
inline std::pair<int, int> line_col(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline json parse(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw InputError(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
}

}  // namespace dwell::io
