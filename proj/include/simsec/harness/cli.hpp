#pragma once

// Command-line front end.
//
//   simsec <train|evaluate|sweep|ablate|baseline> [--config PATH] [--seed N]
//          [--seeds A,B,..] [--out DIR] [--episodes N] ...
//
// Every command writes <out>/metrics.csv. Exit codes: 0 success, 2 bad
// configuration or arguments, 3 numeric divergence during training, 1 any
// other failure.

#include <ostream>

namespace simsec::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simsec::harness
