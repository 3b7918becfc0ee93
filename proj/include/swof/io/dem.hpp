#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "swof/core.hpp"
#include "swof/errors.hpp"
#include "swof/io/config.hpp"

namespace swof::io {

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buf.data(), p);
}

/// ESRI ASCII grid. Values are stored with j = 0 at the southern row, so the
/// first data row of the file lands at j = nrows - 1.
struct AsciiGrid {
  GridGeometry geom;
  Raster<double> values;
  std::optional<double> nodata;
};

inline AsciiGrid read_ascii_grid(std::istream& in, const std::string& name, bool reject_nodata) {
  auto fail = [&](int line, const std::string& msg) {
    return IoError(name + (line ? ":" + std::to_string(line) : std::string()) + ": " + msg);
  };
  std::map<std::string, std::pair<std::string, int>> header;
  std::string raw;
  int line = 0;
  std::string pending;  // first data line, already consumed
  int pending_line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty()) continue;
    if (!std::isalpha(static_cast<unsigned char>(s.front()))) {
      pending = std::string(s);
      pending_line = line;
      break;
    }
    std::istringstream ls{std::string(s)};
    std::string key, value, extra;
    ls >> key >> value;
    if (value.empty() || (ls >> extra)) throw fail(line, "malformed header line");
    for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (header.count(key)) throw fail(line, "duplicate header key '" + key + "'");
    header[key] = {value, line};
  }
  auto number = [&](const std::string& key) -> std::optional<double> {
    const auto it = header.find(key);
    if (it == header.end()) return std::nullopt;
    const auto v = parse_double(it->second.first);
    if (!v) throw fail(it->second.second, "bad value for '" + key + "'");
    return v;
  };
  auto required = [&](const std::string& key) {
    const auto v = number(key);
    if (!v) throw fail(0, "missing header key '" + key + "'");
    return *v;
  };
  for (const auto& [k, v] : header) {
    static const std::array<const char*, 8> known{"ncols",     "nrows",     "xllcorner", "yllcorner",
                                                  "xllcenter", "yllcenter", "cellsize",  "nodata_value"};
    if (std::find_if(known.begin(), known.end(), [&](const char* n) { return k == n; }) == known.end())
      throw fail(v.second, "unknown header key '" + k + "'");
  }

  const double ncols = required("ncols");
  const double nrows = required("nrows");
  if (ncols < 1 || nrows < 1 || ncols != std::floor(ncols) || nrows != std::floor(nrows))
    throw fail(0, "ncols and nrows must be positive integers");
  const double cell = required("cellsize");
  if (!(cell > 0.0)) throw fail(header["cellsize"].second, "cellsize must be > 0");
  AsciiGrid g;
  g.geom.nx = static_cast<int>(ncols);
  g.geom.ny = static_cast<int>(nrows);
  g.geom.dx = g.geom.dy = cell;
  if (auto c = number("xllcenter")) {
    g.geom.x0 = *c - cell / 2;
  } else {
    g.geom.x0 = required("xllcorner");
  }
  if (auto c = number("yllcenter")) {
    g.geom.y0 = *c - cell / 2;
  } else {
    g.geom.y0 = required("yllcorner");
  }
  g.nodata = number("nodata_value");
  g.values = Raster<double>(g.geom.nx, g.geom.ny);

  const long total = static_cast<long>(g.geom.nx) * g.geom.ny;
  long k = 0;
  auto consume = [&](const std::string& text, int at) {
    std::istringstream ls(text);
    std::string tok;
    while (ls >> tok) {
      if (k >= total) throw fail(at, "more values than ncols x nrows");
      const auto v = parse_double(tok);
      if (!v) throw fail(at, "bad value '" + tok + "'");
      const int row = static_cast<int>(k / g.geom.nx);
      const int col = static_cast<int>(k % g.geom.nx);
      if (g.nodata && *v == *g.nodata && reject_nodata)
        throw fail(at, "nodata value at row " + std::to_string(row) + ", column " + std::to_string(col) +
                           " inside the domain");
      g.values(col, g.geom.ny - 1 - row) = *v;
      ++k;
    }
  };
  if (pending_line) consume(pending, pending_line);
  while (std::getline(in, raw)) consume(raw, ++line);
  if (k != total)
    throw fail(line, "expected " + std::to_string(total) + " values, found " + std::to_string(k));
  return g;
}

inline AsciiGrid read_ascii_grid(const std::filesystem::path& path, bool reject_nodata) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open raster '" + path.string() + "'");
  return read_ascii_grid(in, path.string(), reject_nodata);
}

struct Dem {
  GridGeometry geom;
  Raster<double> z;
};

/// Topography file; every cell is part of the domain, so nodata is an error.
inline Dem load_dem(const std::filesystem::path& path) {
  AsciiGrid g = read_ascii_grid(path, true);
  if (g.geom.dx != g.geom.dy) throw IoError(path.string() + ": cells must be square");
  return {g.geom, std::move(g.values)};
}

inline void write_ascii_grid(std::ostream& out, const GridGeometry& geom, const Raster<double>& v,
                             std::optional<double> nodata = std::nullopt) {
  if (geom.dx != geom.dy) throw IoError("ASCII grids need square cells");
  out << "ncols " << geom.nx << "\n"
      << "nrows " << geom.ny << "\n"
      << "xllcorner " << format_number(geom.x0) << "\n"
      << "yllcorner " << format_number(geom.y0) << "\n"
      << "cellsize " << format_number(geom.dx) << "\n";
  if (nodata) out << "nodata_value " << format_number(*nodata) << "\n";
  for (int j = geom.ny - 1; j >= 0; --j) {
    for (int i = 0; i < geom.nx; ++i) {
      if (i) out << ' ';
      out << format_number(v(i, j));
    }
    out << '\n';
  }
}

inline void write_ascii_grid(const std::filesystem::path& path, const GridGeometry& geom,
                             const Raster<double>& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_ascii_grid(out, geom, v);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline void write_dem(const std::filesystem::path& path, const GridGeometry& geom, const Raster<double>& z) {
  write_ascii_grid(path, geom, z);
}

}  // namespace swof::io
