#pragma once

#include <string>
#include <vector>

namespace geoflow::thermo {

struct SelfTestLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the worked examples of the thermodynamic engine against
/// closed-form or independently computed values.
std::vector<SelfTestLine> thermo_selftest();

}  // namespace geoflow::thermo
