#include "hjbpath/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hjbpath/error.hpp"

namespace hjbpath {

namespace {

static_assert(sizeof(double) == 8);

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (char& b : bytes) {
    b = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  out.write(bytes, 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | bytes[k];
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_value_dump(std::ostream& out, const ValueFunction& vf) {
  const SolverConfig& c = vf.config();
  const Grid& g = vf.grid();
  // Built by hand so the numbers use the same shortest round-trip text as
  // the CSV writers.
  out << "{\"dims\":[" << vf.num_slices() << ',' << g.nx << ',' << g.ny << "],\"box\":["
      << format_double(c.box.xmin) << ',' << format_double(c.box.xmax) << ','
      << format_double(c.box.ymin) << ',' << format_double(c.box.ymax)
      << "],\"T\":" << format_double(c.T) << ",\"K\":" << c.K
      << ",\"sigma\":" << format_double(c.sigma)
      << ",\"endianness\":\"little\",\"dtype\":\"f64\"}\n";
  for (double v : vf.data()) put_le(out, v);
}

ValueDump read_value_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("value dump is empty");
  ValueDump d;
  try {
    const auto h = nlohmann::json::parse(line);
    if (h.at("endianness") != "little" || h.at("dtype") != "f64")
      throw ParseError("unsupported value dump encoding");
    d.dims = h.at("dims").get<std::array<std::size_t, 3>>();
    const auto b = h.at("box").get<std::array<double, 4>>();
    d.box = {b[0], b[1], b[2], b[3]};
    d.T = h.at("T").get<double>();
    d.K = h.at("K").get<std::size_t>();
    d.sigma = h.at("sigma").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad value dump header: ") + e.what());
  }
  const std::size_t count = d.dims[0] * d.dims[1] * d.dims[2];
  std::vector<unsigned char> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw ParseError("value dump is truncated");
  d.values.resize(count);
  for (std::size_t n = 0; n < count; ++n) d.values[n] = get_le(raw.data() + 8 * n);
  return d;
}

void write_slice_csv(std::ostream& out, const ValueFunction& vf, std::size_t k) {
  const Grid& g = vf.grid();
  const auto u = vf.slice(k);
  out << "i,j,x,y,u\n";
  for (std::size_t i = 0; i < g.nx; ++i) {
    for (std::size_t j = 0; j < g.ny; ++j) {
      out << i << ',' << j << ',' << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ','
          << format_double(u[g.index(i, j)]) << '\n';
    }
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& path) {
  out << "t,x,y,clamped\n";
  for (const auto& s : path.samples) {
    out << format_double(s.t) << ',' << format_double(s.p.x) << ',' << format_double(s.p.y) << ','
        << (s.clamped ? 1 : 0) << '\n';
  }
}

void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats) {
  out << "t,mean_x,mean_y,std_x,std_y\n";
  for (std::size_t n = 0; n < stats.mean_path.samples.size(); ++n) {
    const auto& s = stats.mean_path.samples[n];
    out << format_double(s.t) << ',' << format_double(s.p.x) << ',' << format_double(s.p.y) << ','
        << format_double(stats.std_devs[n].x) << ',' << format_double(stats.std_devs[n].y)
        << '\n';
  }
}

void write_snapshot_csv(std::ostream& out, const ControlSnapshot& snap) {
  out << "x,y,sx,sy,degenerate_flag\n";
  for (const auto& s : snap.samples) {
    out << format_double(s.p.x) << ',' << format_double(s.p.y) << ','
        << format_double(s.control.s.dir.x) << ',' << format_double(s.control.s.dir.y) << ','
        << (s.control.degenerate ? 1 : 0) << '\n';
  }
}

}  // namespace hjbpath
