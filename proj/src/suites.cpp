#include "sublab/suites.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "sublab/theory.hpp"

namespace sublab {

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (count == 0) {
    return;
  }
  if (workers == 0) {
    workers = std::thread::hardware_concurrency();
  }
  workers = std::clamp<std::size_t>(workers, 1, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) {
          break;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

// Each instance produces its records into its own slot; flattening afterwards
// keeps the document order independent of worker scheduling.
template <typename Fn>
std::vector<CheckRecord> pooled_records(std::size_t count, std::size_t workers, Fn&& per_instance) {
  std::vector<std::vector<CheckRecord>> slots(count);
  parallel_for(count, workers, [&](std::size_t i) { slots[i] = per_instance(i); });
  std::vector<CheckRecord> flat;
  for (std::vector<CheckRecord>& slot : slots) {
    for (CheckRecord& rec : slot) {
      flat.push_back(std::move(rec));
    }
  }
  return flat;
}

std::string describe_instance(const char* klass, std::size_t n, std::size_t m,
                              const std::string& spectrum, std::uint64_t seed) {
  std::ostringstream os;
  os << klass << " n=" << n << " m=" << m << " " << spectrum << " seed=" << seed;
  return os.str();
}

CheckRecord make_record(std::string check, std::string instance, double measured,
                        double tolerance, bool pass, std::string note = {}) {
  CheckRecord rec;
  rec.check = std::move(check);
  rec.instance = std::move(instance);
  rec.measured = measured;
  rec.tolerance = tolerance;
  rec.pass = pass;
  rec.note = std::move(note);
  return rec;
}

// One failing record per check id when an instance dies with an exception.
std::vector<CheckRecord> failed_records(const std::vector<std::string>& checks,
                                        const std::string& instance, const std::exception& e) {
  std::vector<CheckRecord> records;
  const bool contract = dynamic_cast<const contract_error*>(&e) != nullptr;
  for (const std::string& check : checks) {
    records.push_back(make_record(check, instance, 0.0, 0.0, false,
                                  std::string(contract ? "contract violation: " : "error: ") +
                                      e.what()));
  }
  return records;
}

std::size_t usable_count(const ConvergenceReport& report, double floor) {
  const double cut = floor * report.initial_norm;
  std::size_t count = 0;
  while (count < report.cycles.size() && report.cycles[count].exit_norm > cut) {
    ++count;
  }
  return count;
}

}  // namespace

std::size_t SuiteResult::passed() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; }));
}

std::size_t SuiteResult::failed() const { return records.size() - passed(); }

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "lemma1", "lemma2", "lemma3", "theorem1", "corollary-n1", "corollary-alt", "lemma4", "all"};
  return names;
}

bool is_suite_name(const std::string& name) {
  const auto& names = suite_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

CheckRecord run_check_guarded(const std::string& check, const std::string& instance,
                              const std::function<CheckRecord()>& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return failed_records({check}, instance, e).front();
  }
}

SpectrumSpec graded_pair_spectrum(std::size_t n, bool imaginary) {
  std::vector<Complex> values;
  const std::size_t pairs = n / 2;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double mu =
        0.7 * std::pow(2.0 / 0.7, static_cast<double>(i) / static_cast<double>(pairs - 1));
    const Complex lam = imaginary ? Complex(0.0, mu) : Complex(mu, 0.0);
    values.push_back(lam);
    values.push_back(-lam);
  }
  return SpectrumSpec::explicit_list(std::move(values));
}

std::size_t normal_pool_size() { return 200; }

PoolEntry normal_pool_instance(std::size_t index, std::uint64_t base_seed) {
  static const std::size_t kSizes[] = {20, 50, 100};
  static const std::size_t kRestarts[] = {1, 3, 5, 10};
  const std::size_t combo = index % 24;
  const std::size_t spec_i = combo / 12;
  const std::size_t n = kSizes[(combo / 4) % 3];
  const std::size_t m = kRestarts[combo % 4];
  const SpectrumSpec spec = spec_i == 0 ? SpectrumSpec::annulus(1.0, 2.0)
                                        : SpectrumSpec::real_interval(1.0, 2.0);
  const std::uint64_t seed = base_seed + index;

  PoolEntry entry;
  entry.sys = gen_normal(n, spec, seed);
  entry.m = m;
  entry.descriptor = describe_instance("normal", n, m, spec.describe(), seed);
  return entry;
}

namespace {

// 50-instance pool for the explicit Krylov-matrix identities: small sizes and
// degrees keep the exponentially conditioned K numerically full rank.
struct KrylovPoolEntry {
  SystemInstance sys;
  std::size_t m;
  std::string descriptor;
};

KrylovPoolEntry krylov_pool_instance(std::size_t index, std::uint64_t base_seed) {
  static const std::size_t kSizes[] = {8, 12, 16, 20};
  static const std::size_t kDegrees[] = {2, 3, 4, 5};
  const std::size_t combo = index % 16;
  const std::size_t n = kSizes[combo / 4];
  const std::size_t m = kDegrees[combo % 4];
  const std::uint64_t seed = base_seed + index;
  return {gen_normal(n, SpectrumSpec::annulus(1.0, 2.0), seed), m,
          describe_instance("normal", n, m, "annulus:1,2", seed)};
}

constexpr std::size_t kKrylovPoolSize = 50;
constexpr std::size_t kEqualityPoolSize = 20;
constexpr std::size_t kLemma4PoolSize = 50;

SuiteResult suite_lemma1(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "lemma1";
  suite.records = pooled_records(kKrylovPoolSize, cfg.workers, [&](std::size_t i) {
    KrylovPoolEntry entry = krylov_pool_instance(i, cfg.base_seed);
    const std::vector<std::string> checks = {"lemma1/pseudoinverse-identity",
                                             "lemma1/e1-identity", "lemma1/pythagoras"};
    try {
      CycleRecord cycle = gmres_cycle(entry.sys.a, entry.sys.b, entry.m);
      KrylovBundle bundle = build_krylov_matrix(entry.sys.a, entry.sys.b, entry.m);
      const double defect = lemma1_check(bundle, cycle.exit_residual).defect;
      UndersysResult u = undersys_check(entry.sys.a, entry.sys.b, cycle.exit_residual, entry.m);
      return std::vector<CheckRecord>{
          make_record(checks[0], entry.descriptor, defect, 1e-8, defect <= 1e-8),
          make_record(checks[1], entry.descriptor, u.e1_defect, 1e-8, u.e1_defect <= 1e-8),
          make_record(checks[2], entry.descriptor, u.pythagoras_defect, 1e-8,
                      u.pythagoras_defect <= 1e-8),
      };
    } catch (const std::exception& e) {
      return failed_records(checks, entry.descriptor, e);
    }
  });
  return suite;
}

SuiteResult suite_lemma2(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "lemma2";
  suite.records = pooled_records(kKrylovPoolSize, cfg.workers, [&](std::size_t i) {
    KrylovPoolEntry entry = krylov_pool_instance(i, cfg.base_seed);
    try {
      const double defect = lemma2_check(entry.sys, entry.sys.b, entry.m);
      return std::vector<CheckRecord>{make_record("lemma2/factorization", entry.descriptor,
                                                  defect, 1e-10, defect <= 1e-10)};
    } catch (const std::exception& e) {
      return failed_records({"lemma2/factorization"}, entry.descriptor, e);
    }
  });
  return suite;
}

SuiteResult suite_lemma3(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "lemma3";
  suite.records = pooled_records(normal_pool_size(), cfg.workers, [&](std::size_t i) {
    PoolEntry entry = normal_pool_instance(i, cfg.base_seed);
    const std::vector<std::string> checks = {"lemma3/norm-equality", "lemma3/conjugation"};
    try {
      Lemma3Result res = lemma3_check(entry.sys.a, entry.sys.klass, entry.sys.b, entry.m);
      const double diff = std::abs(res.norm_a - res.norm_ah) / norm(entry.sys.b);
      return std::vector<CheckRecord>{
          make_record(checks[0], entry.descriptor, diff, 1e-10, diff <= 1e-10),
          make_record(checks[1], entry.descriptor, res.conjugation_defect, 1e-8,
                      res.conjugation_defect <= 1e-8),
      };
    } catch (const std::exception& e) {
      return failed_records(checks, entry.descriptor, e);
    }
  });
  return suite;
}

SuiteResult suite_theorem1(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "theorem1";
  suite.records = pooled_records(normal_pool_size(), cfg.workers, [&](std::size_t i) {
    PoolEntry entry = normal_pool_instance(i, cfg.base_seed);
    try {
      RunOptions options;
      options.store_residual_vectors = false;
      options.extract_polynomials = false;
      ConvergenceReport report = restarted_gmres(entry.sys, entry.m, cfg.max_cycles, 0.0, options);
      try {
        BoundReport bound = theorem1_check(report, cfg.floor, cfg.ratio_tol);
        return std::vector<CheckRecord>{make_record("theorem1/ratio-pairs", entry.descriptor,
                                                    bound.worst_slack(), cfg.ratio_tol,
                                                    bound.pass)};
      } catch (const insufficient_data_error&) {
        return std::vector<CheckRecord>{
            make_record("theorem1/ratio-pairs", entry.descriptor, 0.0, cfg.ratio_tol, true,
                        "vacuous: fewer than two cycles above the floor")};
      }
    } catch (const std::exception& e) {
      return failed_records({"theorem1/ratio-pairs"}, entry.descriptor, e);
    }
  });
  return suite;
}

SuiteResult suite_corollary_n1(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "corollary-n1";
  suite.records = pooled_records(kEqualityPoolSize, cfg.workers, [&](std::size_t i) {
    const std::size_t n = 12;
    const std::size_t m = n - 1;
    const std::uint64_t seed = cfg.base_seed + i;
    const std::string desc = describe_instance("hermitian", n, m, "graded-pm:0.7,2", seed);
    const std::vector<std::string> checks = {"equality/w-norm", "equality/ratio-slack",
                                             "equality/prediction"};
    try {
      SystemInstance sys = gen_hermitian(n, graded_pair_spectrum(n, false), seed);
      ConvergenceReport report = restarted_gmres(sys, m, cfg.max_cycles, 0.0);
      const std::size_t usable = usable_count(report, cfg.floor);
      std::vector<CheckRecord> records;

      double worst_w = 0.0;
      for (std::size_t k = 1; k <= usable; ++k) {
        const DenseVector& r_prev =
            k == 1 ? report.initial_residual : report.cycles[k - 2].exit_residual;
        const DenseVector& r_cur = report.cycles[k - 1].exit_residual;
        UndersysResult u = undersys_check(sys.a, r_prev, r_cur, m);
        worst_w = std::max(worst_w, u.w_norm / norm(r_prev));
      }
      records.push_back(make_record(checks[0], desc, worst_w, 1e-8, worst_w <= 1e-8));

      if (usable >= 2) {
        BoundReport bound = theorem1_check(report, cfg.floor, cfg.ratio_tol);
        double worst = 0.0;
        for (double s : bound.slacks) {
          worst = std::max(worst, std::abs(s));
        }
        records.push_back(make_record(checks[1], desc, worst, 1e-8, worst <= 1e-8));
      } else {
        records.push_back(make_record(checks[1], desc, 0.0, 1e-8, true,
                                      "vacuous: fewer than two cycles above the floor"));
      }

      if (usable >= 3) {
        const double err = corollary_n1_check(report, cfg.floor);
        records.push_back(make_record(checks[2], desc, err, 1e-6, err <= 1e-6));
      } else {
        records.push_back(make_record(checks[2], desc, 0.0, 1e-6, true,
                                      "vacuous: fewer than three cycles above the floor"));
      }
      return records;
    } catch (const std::exception& e) {
      return failed_records(checks, desc, e);
    }
  });
  return suite;
}

SuiteResult suite_corollary_alt(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "corollary-alt";
  const std::size_t total = 2 * kEqualityPoolSize;
  suite.records = pooled_records(total, cfg.workers, [&](std::size_t i) {
    const bool skew = i >= kEqualityPoolSize;
    const std::size_t n = skew ? 10 : 12;
    const std::size_t m = n - 1;
    const std::uint64_t seed = cfg.base_seed + (i % kEqualityPoolSize);
    const std::string desc = describe_instance(skew ? "skew-hermitian" : "hermitian", n, m,
                                               skew ? "graded-im:0.7,2" : "graded-pm:0.7,2", seed);
    const std::vector<std::string> checks = {"alternating/collinearity",
                                             "alternating/alpha-range"};
    try {
      SystemInstance sys = skew ? gen_skew_hermitian(n, graded_pair_spectrum(n, true), seed)
                                : gen_hermitian(n, graded_pair_spectrum(n, false), seed);
      ConvergenceReport report = restarted_gmres(sys, m, cfg.max_cycles, 0.0);
      AlternatingResult res = corollary_alt_check(report, cfg.floor);

      std::vector<CheckRecord> records;
      records.push_back(make_record(checks[0], desc, res.max_collinearity_defect, 1e-8,
                                    res.max_collinearity_defect <= 1e-8));
      double max_alpha = 0.0;
      bool in_range = true;
      for (double alpha : res.alphas) {
        max_alpha = std::max(max_alpha, alpha);
        in_range = in_range && alpha > 0.0 && alpha <= 1.0 + 1e-12;
      }
      CheckRecord range = make_record(checks[1], desc, max_alpha, 1.0, in_range);
      if (res.alphas.empty()) {
        range.note = "vacuous: no usable cycle triple";
      }
      records.push_back(range);
      return records;
    } catch (const std::exception& e) {
      return failed_records(checks, desc, e);
    }
  });
  return suite;
}

SuiteResult suite_lemma4(const SuiteConfig& cfg) {
  SuiteResult suite;
  suite.name = "lemma4";
  suite.records = pooled_records(kLemma4PoolSize, cfg.workers, [&](std::size_t i) {
    static const double kKappas[] = {1.0, 10.0, 100.0};
    static const std::size_t kSizes[] = {20, 50};
    const std::size_t combo = i % 6;
    const double kappa = kKappas[combo / 2];
    const std::size_t n = kSizes[combo % 2];
    const std::size_t m = 5;
    const std::uint64_t seed = cfg.base_seed + i;
    std::ostringstream os;
    os << "diagonalizable kappa=" << kappa << " n=" << n << " m=" << m
       << " annulus:1,2 seed=" << seed;
    const std::string desc = os.str();
    std::vector<std::string> checks = {"lemma4/bound-slack"};
    if (kappa == 1.0) {
      checks.push_back("lemma4/normal-alpha");
      checks.push_back("lemma4/normal-beta");
    }
    try {
      SystemInstance sys = gen_diagonalizable(n, SpectrumSpec::annulus(1.0, 2.0), kappa, seed);
      ConvergenceReport report = restarted_gmres(sys, m, cfg.max_cycles, 0.0);
      BoundReport bound = lemma4_check(sys, report, cfg.floor, cfg.ratio_tol);

      std::vector<CheckRecord> records;
      if (bound.slacks.empty()) {
        records.push_back(make_record(checks[0], desc, 0.0, cfg.ratio_tol, true,
                                      "vacuous: no usable cycle triple"));
      } else {
        records.push_back(make_record(checks[0], desc, bound.worst_slack(), cfg.ratio_tol,
                                      bound.pass));
      }
      if (kappa == 1.0) {
        records.push_back(make_record(checks[1], desc, bound.alpha - 1.0, 1e-10,
                                      bound.alpha - 1.0 <= 1e-10));
        double worst = 0.0;
        for (std::size_t k = 0; k < bound.betas.size(); ++k) {
          worst =
              std::max(worst, bound.betas[k] / report.residual_norm(bound.cycle_indices[k]));
        }
        records.push_back(make_record(checks[2], desc, worst, 1e-10, worst <= 1e-10));
      }
      return records;
    } catch (const std::exception& e) {
      return failed_records(checks, desc, e);
    }
  });
  return suite;
}

}  // namespace

SuiteResult run_suite(const std::string& name, const SuiteConfig& config) {
  if (name == "lemma1") return suite_lemma1(config);
  if (name == "lemma2") return suite_lemma2(config);
  if (name == "lemma3") return suite_lemma3(config);
  if (name == "theorem1") return suite_theorem1(config);
  if (name == "corollary-n1") return suite_corollary_n1(config);
  if (name == "corollary-alt") return suite_corollary_alt(config);
  if (name == "lemma4") return suite_lemma4(config);
  throw contract_error("run_suite: unknown suite '" + name + "'");
}

std::vector<SuiteResult> run_all_suites(const SuiteConfig& config) {
  std::vector<SuiteResult> results;
  for (const std::string& name : suite_names()) {
    if (name == "all") {
      continue;
    }
    results.push_back(run_suite(name, config));
  }
  return results;
}

Figure2Search find_superlinear_instance(const SuiteConfig& config, double kappa) {
  Figure2Search search;
  search.kappa = kappa;
  const SpectrumSpec spec = SpectrumSpec::circle(Complex(1.0, 0.0), 0.5);
  for (std::size_t t = 0; t < config.figure2_budget; ++t) {
    const std::uint64_t seed = config.base_seed + t;
    ++search.seeds_tried;
    SystemInstance sys = gen_diagonalizable(100, spec, kappa, seed);
    RunOptions options;
    options.store_residual_vectors = false;
    options.extract_polynomials = false;
    ConvergenceReport report = restarted_gmres(sys, 5, config.max_cycles, 0.0, options);
    const std::size_t usable = usable_count(report, config.floor);
    for (std::size_t k = 0; k + 1 < usable; ++k) {
      const double drop = report.ratios[k] - report.ratios[k + 1];
      if (drop > 1e-6) {
        search.found = true;
        search.seed = seed;
        search.break_index = k + 1;
        search.drop = drop;
        search.report = std::move(report);
        return search;
      }
    }
  }
  return search;
}

}  // namespace sublab
