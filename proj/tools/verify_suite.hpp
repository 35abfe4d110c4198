#pragma once

#include <cstdint>
#include <ostream>

namespace batt::tools {

// Runs every brute-force reference against the library and prints one
// report line per instance. Returns the number of disagreements.
int run_verify_suite(std::ostream& out, std::uint64_t seed);

}  // namespace batt::tools
