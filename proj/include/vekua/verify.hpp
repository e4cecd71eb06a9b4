#pragma once

// Property catalog over all modules: operator identities, manufactured
// solutions, Riemann-Hilbert dimension counts and solvability gates.

#include <iosfwd>
#include <string>
#include <vector>

namespace vekua {

struct PropertyResult {
  std::string name;
  double value = 0;      // measured quantity
  double threshold = 0;  // pass bound
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  /// Flips the sign of the area-operator kernel in the Pompeiu property.
  bool mutate_kernel_sign = false;
};

inline constexpr std::size_t kMinVerifyProperties = 15;

std::vector<PropertyResult> verify_suite(const VerifyOptions& opt = {});

/// One line per property; returns true when all passed.
bool print_verify(const std::vector<PropertyResult>& results, std::ostream& out);

}  // namespace vekua
