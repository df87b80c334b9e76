#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sublab/gmres.hpp"
#include "sublab/suites.hpp"
#include "sublab/system.hpp"

namespace sublab {

inline constexpr const char* kToolVersion = "krylov-sublab 0.1.0";

/// Everything a subcommand needs; flags override JSON config values, which
/// override these defaults. KRYLOV_SUBLAB_SEED fills seed when no flag did.
struct RunConfig {
  std::size_t n = 100;
  std::size_t m = 5;
  std::string klass = "normal";
  std::string spectrum = "annulus:1,2";
  std::uint64_t seed = 1;
  double kappa = 1.0;
  std::size_t max_cycles = 30;
  double rtol = 1e-8;
  double floor = 1e-8;
  std::string out_dir = ".";
  std::string input_dir;
  std::size_t budget = 64;
  std::string suite = "all";
  int figure = 1;
};

/// Generates the configured instance (dispatching on the class tag).
SystemInstance make_instance(const RunConfig& config);

// ---- emission ---------------------------------------------------------

/// "cycle,residual_norm,ratio" rows; the cycle-0 row has an empty ratio.
/// Floating-point values carry 17 significant digits.
std::string report_to_csv(const ConvergenceReport& report);

std::string report_to_json_text(const ConvergenceReport& report);

std::string verdicts_to_json_text(const std::vector<SuiteResult>& suites,
                                  const std::string& selector, const SuiteConfig& config);

/// Self-contained log-scale residual line chart; highlight_cycle marks the
/// ratio-drop segment (1-based cycle index) on search results.
std::string render_residual_svg(const std::string& title, const std::vector<double>& norms,
                                std::optional<std::size_t> highlight_cycle = std::nullopt);

// ---- subcommands ------------------------------------------------------

int run_gen(const RunConfig& config);
int run_solve(const RunConfig& config);
int run_verify(const RunConfig& config);
int run_figure(const RunConfig& config);

/// Parses argv and dispatches; returns the process exit status.
int run_cli(int argc, const char* const* argv);

}  // namespace sublab
