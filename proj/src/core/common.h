#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bernkoop {

enum class Status : int {
  Ok = 0,
  DomainError = 1,     // argument outside its mathematical domain
  ShapeError = 2,      // container size disagrees with declared degree/dimension
  OutOfBox = 3,        // map image leaves the unit box beyond tolerance
  EscapeError = 4,     // trajectory leaves the native box during integration
  AssignmentError = 5, // lattice assignment heuristic produced crossing edges
  OutOfHull = 6,       // inverse query outside the image simplices
  DegenerateError = 7, // zero-volume simplex or degenerate box axis
  ConfigError = 8,     // bad user configuration (CLI / file formats)
  CapabilityError = 9, // operation needs data the object does not carry (e.g. gradient)
  IoError = 10,
  RankError = 11,      // SVD truncation removed every singular value
};

struct Error : std::runtime_error {
  Status status;
  Error(Status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

using Vec = std::vector<double>;

inline void require(bool cond, Status s, const std::string& msg) {
  if (!cond) throw Error(s, msg);
}

}  // namespace bernkoop
