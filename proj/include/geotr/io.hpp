/// @file io.hpp
/// @brief Serialisation of curve chains (JSON), AC currents (JSON header plus
/// little-endian float64 payload, or CSV) and current paths (CSV).
#pragma once

#include "geotr/currents.hpp"
#include "geotr/transport.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "json.hpp"

namespace geotr::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Curve chains: [{"weight": w, "vertices": [[x, y], ...]}, ...]

inline json chain_to_json(const CurveChain& T) {
  json arr = json::array();
  for (const auto& c : T.curves()) {
    json verts = json::array();
    for (const auto& v : c.vertices) {
      json p = json::array();
      for (int a = 0; a < v.size(); ++a) p.push_back(v[a]);
      verts.push_back(std::move(p));
    }
    arr.push_back({{"weight", c.weight}, {"vertices", std::move(verts)}});
  }
  return arr;
}

inline CurveChain chain_from_json(const json& j, int dim) {
  if (!j.is_array()) throw ConfigError("curve chain JSON must be an array of curves");
  std::vector<Curve> curves;
  for (const auto& jc : j) {
    if (!jc.contains("weight") || !jc.contains("vertices"))
      throw ConfigError("each curve needs 'weight' and 'vertices'");
    Curve c;
    c.weight = jc.at("weight").get<double>();
    for (const auto& jp : jc.at("vertices")) {
      if (!jp.is_array() || static_cast<int>(jp.size()) != dim)
        throw DimensionError("curve vertex has wrong dimension");
      Vec v(dim);
      for (int a = 0; a < dim; ++a) v[a] = jp[a].get<double>();
      c.vertices.push_back(v);
    }
    curves.push_back(std::move(c));
  }
  return CurveChain(dim, std::move(curves));
}

inline CurveChain read_chain(const std::filesystem::path& file, int dim) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open curve chain file: " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("curve chain file " + file.string() + ": " + e.what());
  }
  return chain_from_json(j, dim);
}

inline void write_chain(const std::filesystem::path& file, const CurveChain& T) {
  std::ofstream out(file);
  out << std::setprecision(17) << chain_to_json(T).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// AC currents

inline json box_to_json(const Box& box) {
  json lo = json::array(), ext = json::array(), n = json::array();
  for (int a = 0; a < box.dim; ++a) {
    lo.push_back(box.lo[a]);
    ext.push_back(box.extent[a]);
    n.push_back(box.n[a]);
  }
  return {{"dim", box.dim}, {"lo", lo}, {"extent", ext}, {"n", n}};
}

inline Box box_from_json(const json& j) {
  Box b;
  b.dim = j.at("dim").get<int>();
  if (b.dim < 2 || b.dim > 3) throw DimensionError("box dimension must be 2 or 3");
  b.lo = Vec(b.dim);
  b.extent = Vec(b.dim);
  for (int a = 0; a < b.dim; ++a) {
    b.lo[a] = j.at("lo")[a].get<double>();
    b.extent[a] = j.at("extent")[a].get<double>();
    b.n[a] = j.at("n")[a].get<int>();
  }
  return b;
}

namespace detail {

inline void put_f64_le(std::ostream& out, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, sizeof u);
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  out.write(reinterpret_cast<const char*>(&u), sizeof u);
}

inline double get_f64_le(std::istream& in) {
  std::uint64_t u = 0;
  in.read(reinterpret_cast<char*>(&u), sizeof u);
  if (!in) throw ConfigError("AC payload truncated");
  if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap64(u);
  double v;
  std::memcpy(&v, &u, sizeof v);
  return v;
}

}  // namespace detail

/// Writes `<stem>.json` (box header) and `<stem>.bin` (node-major samples,
/// axis 0 fastest, components interleaved, little-endian float64).
inline void write_ac(const std::filesystem::path& stem, const ACCurrent& T) {
  json header = {{"box", box_to_json(T.box())}, {"components", T.dim()}, {"encoding", "float64-le"},
                 {"payload", stem.filename().string() + ".bin"}};
  std::ofstream(stem.string() + ".json") << header.dump(2) << '\n';
  std::ofstream bin(stem.string() + ".bin", std::ios::binary);
  for (double v : T.samples()) detail::put_f64_le(bin, v);
}

inline ACCurrent read_ac(const std::filesystem::path& header_file) {
  std::ifstream in(header_file);
  if (!in) throw ConfigError("cannot open AC header: " + header_file.string());
  json h;
  try {
    in >> h;
  } catch (const json::parse_error& e) {
    throw ConfigError("AC header " + header_file.string() + ": " + e.what());
  }
  Box box = box_from_json(h.at("box"));
  auto payload = header_file.parent_path() / h.at("payload").get<std::string>();
  std::ifstream bin(payload, std::ios::binary);
  if (!bin) throw ConfigError("cannot open AC payload: " + payload.string());
  std::vector<double> s(box.num_nodes() * box.dim);
  for (double& v : s) v = detail::get_f64_le(bin);
  return ACCurrent::from_samples(box, std::move(s));
}

/// CSV with columns x,y[,z],w0,w1[,w2], one row per node.
inline void write_ac_csv(std::ostream& out, const ACCurrent& T) {
  const int d = T.dim();
  const char* names[3] = {"x", "y", "z"};
  for (int a = 0; a < d; ++a) out << names[a] << ',';
  for (int c = 0; c < d; ++c) out << 'w' << c << (c + 1 < d ? "," : "\n");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < T.box().num_nodes(); ++i) {
    Vec x = T.box().node(i);
    Vec w = T.sample(i);
    for (int a = 0; a < d; ++a) out << x[a] << ',';
    for (int c = 0; c < d; ++c) out << w[c] << (c + 1 < d ? "," : "\n");
  }
}

// ---------------------------------------------------------------------------
// Paths and tables

/// Rows of (t, form label, pairing, mass) for every path time and form.
inline void write_path_csv(std::ostream& out, const CurrentPath& path, const std::vector<TestForm1>& forms) {
  out << "t,form,pairing,mass\n" << std::setprecision(17);
  for (std::size_t k = 0; k < path.size(); ++k) {
    double m = mass(path.currents[k]);
    for (const auto& f : forms)
      out << path.times[k] << ',' << f.label << ',' << pair(path.currents[k], f) << ',' << m << '\n';
  }
}

/// A table with a fixed header; values are written with 17 significant
/// digits so output is reproducible bit for bit.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error("CSV row width does not match header");
    rows_.push_back(std::move(row));
  }

  static std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
  }

  void write(std::ostream& out) const {
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) out << r[i] << (i + 1 < r.size() ? "," : "\n");
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace geotr::io
