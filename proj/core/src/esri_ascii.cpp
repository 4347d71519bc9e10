// ESRI ASCII grid (.asc) reader and writer.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hjbpath/error.hpp"
#include "hjbpath/io.hpp"
#include "hjbpath/terrain.hpp"

namespace hjbpath {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

bool looks_numeric(std::string_view tok) {
  if (tok.empty()) return false;
  const char c = tok.front();
  return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

double parse_number(std::string_view tok, std::size_t line_no) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric token '" +
                     std::string(tok) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view key, double v, std::size_t line_no) {
  if (v < 1.0 || v != std::floor(v) || v > 1e9) {
    throw ParseError("line " + std::to_string(line_no) + ": " + std::string(key) +
                     " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

// Repeatedly replaces missing cells by the mean of their valid 8-neighbours.
void fill_nodata(std::vector<double>& h, std::vector<char>& missing, std::size_t nx,
                 std::size_t ny) {
  std::size_t remaining = static_cast<std::size_t>(std::count(missing.begin(), missing.end(), 1));
  while (remaining > 0) {
    std::vector<std::pair<std::size_t, double>> filled;
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t idx = j * nx + i;
        if (!missing[idx]) continue;
        double sum = 0.0;
        int count = 0;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            const auto ii = static_cast<long long>(i) + di;
            const auto jj = static_cast<long long>(j) + dj;
            if (ii < 0 || jj < 0 || ii >= static_cast<long long>(nx) ||
                jj >= static_cast<long long>(ny))
              continue;
            const std::size_t n = static_cast<std::size_t>(jj) * nx + static_cast<std::size_t>(ii);
            if (missing[n]) continue;
            sum += h[n];
            ++count;
          }
        }
        if (count > 0) filled.emplace_back(idx, sum / count);
      }
    }
    if (filled.empty()) {
      throw ValidationError("NODATA region cannot be filled: no valid neighbours remain");
    }
    for (const auto& [idx, v] : filled) {
      h[idx] = v;
      missing[idx] = 0;
    }
    remaining -= filled.size();
  }
}

}  // namespace

ElevationField load_esri_ascii(std::istream& in, NodataPolicy policy) {
  std::map<std::string, double> header;
  std::vector<std::vector<double>> rows;
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  bool in_data = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;

    if (!in_data && !looks_numeric(tokens.front())) {
      if (tokens.size() != 2) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed header line");
      }
      const std::string key = lower(tokens[0]);
      static const char* const kKnown[] = {"ncols",     "nrows",    "xllcorner",
                                           "yllcorner", "cellsize", "nodata_value"};
      if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
        throw ParseError("line " + std::to_string(line_no) + ": unknown header key '" +
                         std::string(tokens[0]) + "'");
      }
      if (header.count(key)) {
        throw ParseError("line " + std::to_string(line_no) + ": duplicate header key '" +
                         std::string(tokens[0]) + "'");
      }
      header[key] = parse_number(tokens[1], line_no);
      continue;
    }

    if (!in_data) {
      for (const char* key : {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"}) {
        if (!header.count(key))
          throw ParseError(std::string("missing header key '") + key + "'");
      }
      ncols = parse_count("ncols", header["ncols"], line_no);
      nrows = parse_count("nrows", header["nrows"], line_no);
      if (!(header["cellsize"] > 0.0)) throw ParseError("cellsize must be positive");
      in_data = true;
    }

    if (tokens.size() != ncols) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(ncols) + " values, found " +
                       std::to_string(tokens.size()));
    }
    std::vector<double> row;
    row.reserve(ncols);
    for (auto tok : tokens) row.push_back(parse_number(tok, line_no));
    rows.push_back(std::move(row));
    if (rows.size() > nrows) {
      throw ParseError("line " + std::to_string(line_no) + ": more than " +
                       std::to_string(nrows) + " data rows");
    }
  }

  if (!in_data) throw ParseError("grid contains no data rows");
  if (rows.size() != nrows) {
    throw ParseError("expected " + std::to_string(nrows) + " data rows, found " +
                     std::to_string(rows.size()));
  }

  std::optional<double> nodata;
  if (header.count("nodata_value")) nodata = header["nodata_value"];

  std::vector<double> heights(ncols * nrows);
  std::vector<char> missing(ncols * nrows, 0);
  for (std::size_t r = 0; r < nrows; ++r) {
    const std::size_t j = nrows - 1 - r;  // first data row is the northernmost
    for (std::size_t i = 0; i < ncols; ++i) {
      const double v = rows[r][i];
      heights[j * ncols + i] = v;
      if (nodata && v == *nodata) missing[j * ncols + i] = 1;
    }
  }

  if (std::find(missing.begin(), missing.end(), 1) != missing.end()) {
    if (policy == NodataPolicy::kReject) {
      throw ValidationError("grid contains NODATA cells (use the fill policy to interpolate)");
    }
    fill_nodata(heights, missing, ncols, nrows);
  }

  const double cell = header["cellsize"];
  return ElevationField({header["xllcorner"], header["yllcorner"]}, cell, cell, ncols, nrows,
                        std::move(heights), policy, nodata);
}

ElevationField load_esri_ascii(const std::filesystem::path& path, NodataPolicy policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open grid file '" + path.string() + "'");
  return load_esri_ascii(in, policy);
}

void write_esri_ascii(std::ostream& out, const ElevationField& field) {
  if (std::abs(field.dx() - field.dy()) > 1e-12 * std::max(field.dx(), field.dy())) {
    throw ValidationError("ESRI ASCII grids require square cells");
  }
  out << "ncols " << field.nx() << '\n';
  out << "nrows " << field.ny() << '\n';
  out << "xllcorner " << format_double(field.origin().x) << '\n';
  out << "yllcorner " << format_double(field.origin().y) << '\n';
  out << "cellsize " << format_double(field.dx()) << '\n';
  if (field.nodata_value()) out << "NODATA_value " << format_double(*field.nodata_value()) << '\n';
  for (std::size_t r = 0; r < field.ny(); ++r) {
    const std::size_t j = field.ny() - 1 - r;
    for (std::size_t i = 0; i < field.nx(); ++i) {
      if (i) out << ' ';
      out << format_double(field.height(i, j));
    }
    out << '\n';
  }
}

void write_esri_ascii(const std::filesystem::path& path, const ElevationField& field) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write grid file '" + path.string() + "'");
  write_esri_ascii(out, field);
  if (!out) throw IoError("failed writing grid file '" + path.string() + "'");
}

}  // namespace hjbpath
