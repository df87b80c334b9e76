#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sublab/generate.hpp"
#include "sublab/gmres.hpp"
#include "sublab/system.hpp"

namespace sublab {

/// Knobs shared by every verification suite. Defaults match the documented
/// pools; base_seed shifts every instance seed in lockstep.
struct SuiteConfig {
  std::uint64_t base_seed = 1;
  std::size_t workers = 0;  ///< 0 = hardware concurrency
  std::size_t figure2_budget = 64;
  double floor = 1e-8;
  double ratio_tol = 1e-8;
  std::size_t max_cycles = 30;
};

struct CheckRecord {
  std::string check;
  std::string instance;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct SuiteResult {
  std::string name;
  std::vector<CheckRecord> records;

  std::size_t passed() const;
  std::size_t failed() const;
  bool all_pass() const { return failed() == 0; }
};

/// Valid selectors, in execution order of "all" (which is last).
const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);

/// Runs one named suite over its documented pool. Unknown names raise
/// contract_error.
SuiteResult run_suite(const std::string& name, const SuiteConfig& config = {});

/// Every suite, in the fixed order of suite_names() minus "all".
std::vector<SuiteResult> run_all_suites(const SuiteConfig& config = {});

/// Runs fn and converts exceptions into a failing record, so one bad
/// instance poisons neither the suite nor the process.
CheckRecord run_check_guarded(const std::string& check, const std::string& instance,
                              const std::function<CheckRecord()>& fn);

/// Geometrically graded +/- pair spectrum on [0.7, 2]; slow enough that
/// full-width restarts keep several cycles above the floor, narrow enough
/// that the n x n Krylov matrix stays well conditioned.
SpectrumSpec graded_pair_spectrum(std::size_t n, bool imaginary);

/// The 200-instance normal pool shared by the ratio and conjugate-norm
/// suites: spectra {annulus[1,2], real-interval[1,2]} x n {20,50,100} x
/// m {1,3,5,10}, seed = base_seed + index.
struct PoolEntry {
  SystemInstance sys;
  std::size_t m = 0;
  std::string descriptor;
};
PoolEntry normal_pool_instance(std::size_t index, std::uint64_t base_seed);
std::size_t normal_pool_size();

struct Figure2Search {
  bool found = false;
  std::uint64_t seed = 0;
  double kappa = 100.0;
  std::size_t break_index = 0;  ///< 1-based k with rho_{k+1} < rho_k - 1e-6
  double drop = 0.0;
  std::size_t seeds_tried = 0;
  ConvergenceReport report;
};

/// Seed search for a restarted run whose ratio sequence decreases somewhere:
/// diagonalizable instances (circle spectrum around 1, kappa(V) >= 100,
/// n = 100, m = 5) until one shows rho_{k+1} < rho_k - 1e-6 above the floor.
Figure2Search find_superlinear_instance(const SuiteConfig& config = {}, double kappa = 100.0);

}  // namespace sublab
