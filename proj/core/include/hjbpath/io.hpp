#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "hjbpath/control.hpp"
#include "hjbpath/geometry.hpp"
#include "hjbpath/solver.hpp"
#include "hjbpath/trajectory.hpp"

namespace hjbpath {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Raw value dump: one line of JSON
///   {"dims":[K+1,N+1,M+1],"box":[a,b,c,d],"T":..,"K":..,"sigma":..,
///    "endianness":"little","dtype":"f64"}
/// then a newline and the values as little-endian doubles, slice by slice,
/// each slice x-major.
void write_value_dump(std::ostream& out, const ValueFunction& vf);

struct ValueDump {
  std::array<std::size_t, 3> dims{};
  Box box;
  double T = 0.0;
  std::size_t K = 0;
  double sigma = 0.0;
  std::vector<double> values;
};

/// Throws ParseError on a malformed header or truncated data.
ValueDump read_value_dump(std::istream& in);

/// CSV with columns i,j,x,y,u for slice k.
void write_slice_csv(std::ostream& out, const ValueFunction& vf, std::size_t k);

/// CSV with columns t,x,y,clamped.
void write_trajectory_csv(std::ostream& out, const Trajectory& path);

/// CSV with columns t,mean_x,mean_y,std_x,std_y.
void write_ensemble_csv(std::ostream& out, const EnsembleStats& stats);

/// CSV with columns x,y,sx,sy,degenerate_flag.
void write_snapshot_csv(std::ostream& out, const ControlSnapshot& snap);

}  // namespace hjbpath
