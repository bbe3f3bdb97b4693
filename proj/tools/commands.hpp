#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace umw::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitValidation = 3,
  kExitConvergence = 4,
  kExitIo = 5,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "a:b:step" inclusive of b up to rounding; each value must lie in (0,1).
std::vector<double> parse_tau_grid(const std::string& spec);

/// Entry point shared by main() and the tests; never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace umw::cli
