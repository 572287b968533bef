#pragma once

// The price system shared by the pricing rules and the audit metrics: a
// nodal energy price per node/period, a congestion price per line/period,
// and the reference-angle dual per period.

#include <vector>

namespace nodal {

struct PriceSystem {
  std::vector<std::vector<double>> p;      // [node][period], $/MWh
  std::vector<std::vector<double>> gamma;  // [line][period], $/MWh
  std::vector<double> r;                   // [period]
};

}  // namespace nodal
