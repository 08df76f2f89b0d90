#pragma once

// JSON load/save for matrices, channels, generators and geodesic paths.
//
// matrix:     {"n": int, "re": [[...]], "im": [[...]]}   ("rows"/"cols" instead of "n" if not square)
// channel:    {"n_in", "n_out", "orientation", "kraus": [matrix, ...]}
// db:         {"sigma": matrix, "jumps": [{"V": matrix, "omega": real}, ...]}
// generator:  {"superoperator": matrix} or {"phi": channel, "H": matrix}

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qms/channels.hpp"
#include "qms/geodesic.hpp"
#include "qms/lindblad.hpp"
#include "qms/matcore.hpp"

namespace qms {

using json = nlohmann::json;

inline json to_json(const Matrix& a) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json r = json::array(), c = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      r.push_back(a(i, j).real());
      c.push_back(a(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  json out;
  if (a.rows() == a.cols()) {
    out["n"] = a.rows();
  } else {
    out["rows"] = a.rows();
    out["cols"] = a.cols();
  }
  out["re"] = re;
  out["im"] = im;
  return out;
}

inline Matrix matrix_from_json(const json& j) {
  try {
    require(j.is_object() && j.contains("re"), Errc::invalid_input, "matrix JSON needs \"re\"");
    const json& re = j.at("re");
    require(re.is_array(), Errc::invalid_input, "matrix \"re\" must be an array of rows");
    Eigen::Index rows = static_cast<Eigen::Index>(re.size());
    Eigen::Index cols = rows ? static_cast<Eigen::Index>(re.at(0).size()) : 0;
    if (j.contains("n")) {
      rows = cols = j.at("n").get<Eigen::Index>();
    } else if (j.contains("rows")) {
      rows = j.at("rows").get<Eigen::Index>();
      cols = j.at("cols").get<Eigen::Index>();
    }
    require(rows > 0 && cols > 0, Errc::invalid_input, "matrix must be non-empty");
    require(static_cast<Eigen::Index>(re.size()) == rows, Errc::shape_mismatch, "matrix \"re\" row count");
    const bool has_im = j.contains("im");
    if (has_im)
      require(static_cast<Eigen::Index>(j.at("im").size()) == rows, Errc::shape_mismatch, "matrix \"im\" row count");
    Matrix a(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      require(static_cast<Eigen::Index>(re.at(r).size()) == cols, Errc::shape_mismatch, "matrix \"re\" column count");
      if (has_im)
        require(static_cast<Eigen::Index>(j.at("im").at(r).size()) == cols, Errc::shape_mismatch,
                "matrix \"im\" column count");
      for (Eigen::Index c = 0; c < cols; ++c)
        a(r, c) = cplx(re.at(r).at(c).get<double>(), has_im ? j.at("im").at(r).at(c).get<double>() : 0.0);
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, std::string("bad matrix JSON: ") + e.what());
  }
}

inline json to_json(const QuantumChannel& ch) {
  json ks = json::array();
  for (const auto& v : ch.kraus()) ks.push_back(to_json(v));
  return {{"n_in", ch.n_in()}, {"n_out", ch.n_out()}, {"orientation", orientation_name(ch.orientation())}, {"kraus", ks}};
}

inline QuantumChannel channel_from_json(const json& j) {
  try {
    std::string o = j.at("orientation").get<std::string>();
    Orientation orient;
    if (o == "unital")
      orient = Orientation::unital;
    else if (o == "trace_preserving" || o == "tp")
      orient = Orientation::trace_preserving;
    else
      throw Error(Errc::invalid_input, "unknown channel orientation \"" + o + "\"");
    std::vector<Matrix> ks;
    for (const auto& k : j.at("kraus")) ks.push_back(matrix_from_json(k));
    return QuantumChannel(j.at("n_in").get<int>(), j.at("n_out").get<int>(), ks, orient);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, std::string("bad channel JSON: ") + e.what());
  }
}

inline json to_json(const DBGenerator& db) {
  json js = json::array();
  for (const auto& jp : db.jumps()) js.push_back({{"V", to_json(jp.v)}, {"omega", jp.omega}});
  return {{"sigma", to_json(db.sigma())}, {"jumps", js}};
}

inline DBGenerator db_from_json(const json& j) {
  try {
    std::vector<Jump> jumps;
    for (const auto& e : j.at("jumps")) jumps.push_back({matrix_from_json(e.at("V")), e.at("omega").get<double>()});
    return DBGenerator(matrix_from_json(j.at("sigma")), jumps);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, std::string("bad generator JSON: ") + e.what());
  }
}

// Heisenberg-picture generator. A "phi" channel is taken as the unital map; a trace-preserving
// channel is converted through its adjoint.
inline SuperOperator generator_from_json(const json& j) {
  try {
    if (j.contains("superoperator")) {
      Matrix m = matrix_from_json(j.at("superoperator"));
      int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.rows()))));
      require(n * n == m.rows() && m.rows() == m.cols(), Errc::shape_mismatch,
              "superoperator must be n^2 x n^2");
      return {n, n, m};
    }
    QuantumChannel phi = channel_from_json(j.at("phi"));
    if (phi.orientation() == Orientation::trace_preserving) phi = phi.adjoint();
    Matrix h = j.contains("H") ? matrix_from_json(j.at("H")) : Matrix::Zero(phi.n_in(), phi.n_in());
    require(phi.n_in() == phi.n_out(), Errc::shape_mismatch, "phi must act on M_n");
    return assemble_gks(phi.kraus(), h).L;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, std::string("bad generator JSON: ") + e.what());
  }
}

inline json to_json(const GeodesicPath& p) {
  json dens = json::array(), flux = json::array();
  for (const auto& r : p.densities) dens.push_back(to_json(r));
  for (const auto& f : p.fluxes) {
    json comp = json::array();
    for (const auto& c : f) comp.push_back(to_json(c));
    flux.push_back(comp);
  }
  return {{"m", p.m},
          {"distance", p.distance},
          {"action", p.action},
          {"iterations", p.iterations},
          {"converged", p.converged},
          {"interval_action", p.interval_action},
          {"densities", dens},
          {"fluxes", flux}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path);
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for " + path);
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace qms
