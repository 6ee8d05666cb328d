#include "coulomb/grid_io.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace coulomb {

namespace {

using json = nlohmann::json;

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
  return r;
}

}  // namespace

void write_grid(const GridFunction& f, std::ostream& os, GridEncoding enc) {
  const GridSpec& g = f.grid();
  json hdr;
  hdr["format"] = "coulomb-grid";
  hdr["version"] = 1;
  hdr["encoding"] = enc == GridEncoding::binary ? "binary" : "csv";
  hdr["dim"] = g.dim;
  hdr["n"] = {g.n[0], g.n[1], g.n[2]};
  hdr["lo"] = {g.lo[0], g.lo[1], g.lo[2]};
  hdr["hi"] = {g.hi[0], g.hi[1], g.hi[2]};
  hdr["h"] = {g.h(0), g.h(1), g.h(2)};
  hdr["byte_order"] = "little";
  hdr["layout"] = "first-axis-fastest";
  os << hdr.dump() << '\n';
  if (enc == GridEncoding::binary) {
    for (double v : f.values()) {
      std::uint64_t u;
      std::memcpy(&u, &v, 8);
      u = to_le(u);
      os.write(reinterpret_cast<const char*>(&u), 8);
    }
  } else {
    os << "i,j,k,x,y,z,value\n" << std::setprecision(17);
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
      const auto m = g.unravel(idx);
      const Vec c = g.center(idx);
      os << m[0] << ',' << m[1] << ',' << m[2] << ',' << c[0] << ',' << c[1] << ','
         << (g.dim == 3 ? c[2] : 0.0) << ',' << f[idx] << '\n';
    }
  }
  if (!os) throw std::runtime_error("write_grid: stream error");
}

GridFunction read_grid(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_grid: missing header");
  json hdr;
  try {
    hdr = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("read_grid: bad header: ") + e.what());
  }
  if (hdr.value("format", "") != "coulomb-grid") throw std::runtime_error("read_grid: not a grid file");
  const int dim = hdr.at("dim").get<int>();
  std::array<int, 3> n{};
  Vec lo, hi;
  for (int a = 0; a < 3; ++a) {
    n[a] = hdr.at("n").at(a).get<int>();
    lo[a] = hdr.at("lo").at(a).get<double>();
    hi[a] = hdr.at("hi").at(a).get<double>();
  }
  const GridSpec g(dim, n, lo, hi);
  std::vector<double> v(g.size());
  if (hdr.at("encoding").get<std::string>() == "binary") {
    for (auto& x : v) {
      std::uint64_t u;
      if (!is.read(reinterpret_cast<char*>(&u), 8)) throw std::runtime_error("read_grid: truncated data");
      u = to_le(u);
      std::memcpy(&x, &u, 8);
    }
  } else {
    std::getline(is, line);
    for (std::size_t row = 0; row < g.size(); ++row) {
      if (!std::getline(is, line)) throw std::runtime_error("read_grid: truncated data");
      std::istringstream ls(line);
      std::string cell;
      int i = 0, j = 0, k = 0;
      double val = 0.0;
      for (int c = 0; c < 7 && std::getline(ls, cell, ','); ++c) {
        if (c == 0) i = std::stoi(cell);
        if (c == 1) j = std::stoi(cell);
        if (c == 2) k = std::stoi(cell);
        if (c == 6) val = std::stod(cell);
      }
      v.at(g.index(i, j, k)) = val;
    }
  }
  return GridFunction(g, std::move(v));
}

void save_grid(const GridFunction& f, const std::string& path, GridEncoding enc) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_grid: cannot open " + path);
  write_grid(f, os, enc);
}

GridFunction load_grid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_grid: cannot open " + path);
  return read_grid(is);
}

}  // namespace coulomb
