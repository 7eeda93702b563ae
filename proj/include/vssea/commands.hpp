#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vssea/scenario.hpp"
#include "vssea/validation.hpp"

namespace vssea {

enum class ExitStatus : int {
  kOk = 0,
  kConfigError = 1,
  kSynthesisError = 2,
  kDivergence = 3,
  kValidationFailed = 4,
};

struct CommandLine {
  std::string verb;  // simulate | synthesize | sweep | validate
  std::optional<std::string> config_path;
  std::optional<std::string> out_path;
  std::vector<std::string> overrides;  // dotted key=value
  std::optional<std::uint64_t> seed;
  std::optional<std::string> sweep;    // key=v1,v2,...
  FaultInjection fault;                // validate only
};

/// 17 significant digits, '.' decimal point, independent of the global locale.
std::string format_double(double v);

std::string csv_header();
/// Rows in fixed column order, LF endings. A failed run ends with a
/// "# truncated" comment line naming the step and diagnostic.
void write_csv(std::ostream& os, const SimTrace& trace, const std::optional<Divergence>& failure = std::nullopt);

/// "label: value" lines.
std::string format_metrics(const Metrics& m);

/// Report for cmd_synthesize. Throws SynthesisError if any certificate fails.
std::string synthesis_report(const ScenarioConfig& config);

struct SweepSpec {
  std::string key;
  std::vector<std::string> values;
};
/// Throws ConfigError on a malformed spec, unknown key or empty value list.
SweepSpec parse_sweep(std::string_view text);

struct SweepRow {
  std::string value;
  std::optional<Metrics> metrics;
  std::string error;  // empty on success
};

/// Runs one scenario per value, concurrently; rows come back in spec order.
std::vector<SweepRow> run_sweep(std::string_view config_text, const std::vector<std::string>& overrides,
                                const SweepSpec& spec);
void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);

/// Executes a command. Data goes to `out` (or the --out file), diagnostics to `err`.
ExitStatus run_command(const CommandLine& cmd, std::ostream& out, std::ostream& err);

}  // namespace vssea
