#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hillnet::cli {

enum ExitCode : int { ok = 0, input_error = 2, optimizer_failure = 3, model_mismatch = 4 };

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OptimizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModelMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Entry point. args excludes the program name. Output that would go to
/// stdout (when --out is "-" or absent) goes to `out`; diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace hillnet::cli
