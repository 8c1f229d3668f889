#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oscres/fredholm.hpp"
#include "oscres/roots.hpp"

namespace oscres::cli {

enum class Command { effpot, resonances, step, transmission, escape, expansion };
enum class MethodChoice { ode, fredholm, both };

/// Process exit codes.
enum ExitCode : int { kOk = 0, kIoError = 1, kParseError = 2, kNumericalError = 3, kVerdictFail = 4 };

/// Invalid flags or flag combinations.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Real momenta lo, ..., hi in `count` equal steps.
struct LambdaSweep {
  double lo = 0.5;
  double hi = 5.0;
  int count = 46;
  [[nodiscard]] std::vector<double> values() const;
};

struct RunConfig {
  Command command = Command::effpot;
  std::optional<std::filesystem::path> potential_spec_path;
  /// Empty selects the command's default sweep.
  std::vector<double> eps_list;
  /// Unset selects the command's default window.
  std::optional<SearchRegion> region;
  /// Unset writes to the output stream.
  std::optional<std::filesystem::path> output_path;
  MethodChoice method = MethodChoice::ode;
  int order = 3;
  int nodes = kDefaultNystromNodes;
  int jobs = 1;
  bool strict = false;
  std::uint64_t seed = 0;
  /// Step indices for the step command.
  std::vector<int> step_n{10, 100, 1000, 10000};
  /// Real momenta for the transmission command.
  LambdaSweep sweep;

  /// Throws UsageError.
  void validate() const;
};

/// The artifact of one command: `content` is the CSV or JSON document, `summary`
/// a JSON verdict record (possibly empty).
struct CommandOutput {
  std::string content;
  std::string summary;
  bool pass = true;
};

/// Runs one command; throws on failure. Validates the config and the spec
/// before any computation.
CommandOutput run_command(const RunConfig& cfg);

/// run_command with exceptions mapped to exit codes and a JSON error record on
/// `err`. The document goes to cfg.output_path (written once, at the end) or to
/// `out`; the summary goes to `out` when a file is written and to `err` otherwise.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Scientific notation with 17 significant digits.
std::string format_real(double x);

}  // namespace oscres::cli
