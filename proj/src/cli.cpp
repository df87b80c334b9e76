#include "sublab/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sublab/matrix_market.hpp"
#include "sublab/theory.hpp"

namespace sublab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed writing '" + path.string() + "'");
  }
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json record_to_json(const CheckRecord& rec) {
  json j{{"check", rec.check},
         {"instance", rec.instance},
         {"measured", rec.measured},
         {"tolerance", rec.tolerance},
         {"pass", rec.pass}};
  if (!rec.note.empty()) {
    j["note"] = rec.note;
  }
  return j;
}

}  // namespace

SystemInstance make_instance(const RunConfig& config) {
  const SpectrumSpec spec = parse_spectrum(config.spectrum);
  const auto klass = matrix_class_from_string(config.klass);
  if (!klass) {
    throw contract_error("unknown matrix class '" + config.klass + "'");
  }
  switch (*klass) {
    case MatrixClass::normal:
      return gen_normal(config.n, spec, config.seed);
    case MatrixClass::hermitian:
      return gen_hermitian(config.n, spec, config.seed);
    case MatrixClass::skew_hermitian:
      return gen_skew_hermitian(config.n, spec, config.seed);
    case MatrixClass::diagonalizable_nonnormal:
      return gen_diagonalizable(config.n, spec, config.kappa, config.seed);
    case MatrixClass::general:
      break;
  }
  throw contract_error("class 'general' has no generator; use gen only with a concrete class");
}

std::string report_to_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "cycle,residual_norm,ratio\n";
  os << "0," << fmt17(report.initial_norm) << ",\n";
  for (std::size_t k = 0; k < report.cycles.size(); ++k) {
    os << (k + 1) << "," << fmt17(report.cycles[k].exit_norm) << "," << fmt17(report.ratios[k])
       << "\n";
  }
  return os.str();
}

namespace {

json report_to_json(const ConvergenceReport& report) {
  json cycles = json::array();
  for (const CycleRecord& rec : report.cycles) {
    json c{{"index", rec.index},
           {"entry_norm", rec.entry_norm},
           {"exit_norm", rec.exit_norm},
           {"iteration_norms", rec.iteration_norms},
           {"breakdown", rec.breakdown}};
    if (rec.polynomial) {
      json coeffs = json::array();
      for (Complex z : rec.polynomial->coefficients) {
        coeffs.push_back(complex_to_json(z));
      }
      c["polynomial"] = coeffs;
    }
    cycles.push_back(std::move(c));
  }
  return json{{"schema", "sublab-report/1"},
              {"tool_version", kToolVersion},
              {"system",
               {{"n", report.n},
                {"m", report.m},
                {"class", to_string(report.klass)},
                {"seed", report.seed}}},
              {"initial_norm", report.initial_norm},
              {"cycles", std::move(cycles)},
              {"ratios", report.ratios},
              {"stop_reason", to_string(report.stop)}};
}

}  // namespace

std::string report_to_json_text(const ConvergenceReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string verdicts_to_json_text(const std::vector<SuiteResult>& suites,
                                  const std::string& selector, const SuiteConfig& config) {
  json jsuites = json::array();
  std::size_t total = 0;
  std::size_t passed = 0;
  for (const SuiteResult& suite : suites) {
    json records = json::array();
    for (const CheckRecord& rec : suite.records) {
      records.push_back(record_to_json(rec));
    }
    jsuites.push_back(json{{"name", suite.name},
                           {"records", std::move(records)},
                           {"summary",
                            {{"total", suite.records.size()},
                             {"passed", suite.passed()},
                             {"failed", suite.failed()}}}});
    total += suite.records.size();
    passed += suite.passed();
  }
  json doc{{"schema", "sublab-verdict/1"},
           {"tool_version", kToolVersion},
           {"suite", selector},
           {"config",
            {{"base_seed", config.base_seed},
             {"floor", config.floor},
             {"ratio_tol", config.ratio_tol},
             {"max_cycles", config.max_cycles},
             {"figure2_budget", config.figure2_budget}}},
           {"suites", std::move(jsuites)},
           {"summary", {{"total", total}, {"passed", passed}, {"failed", total - passed}}}};
  return doc.dump(2) + "\n";
}

std::string render_residual_svg(const std::string& title, const std::vector<double>& norms,
                                std::optional<std::size_t> highlight_cycle) {
  const int width = 720;
  const int height = 480;
  const double left = 70, right = 20, top = 44, bottom = 52;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::vector<double> ys;
  for (double v : norms) {
    if (v > 0.0) {
      ys.push_back(std::log10(v));
    }
  }
  if (ys.size() < 2) {
    ys = {0.0, -1.0};
  }
  double ymin = ys[0], ymax = ys[0];
  for (double y : ys) {
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (ymax - ymin < 1.0) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double xmax = static_cast<double>(norms.size() - 1);
  auto px = [&](double cycle) { return left + (xmax > 0 ? cycle / xmax : 0.0) * plot_w; };
  auto py = [&](double logv) { return top + (ymax - logv) / (ymax - ymin) * plot_h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<!-- " << kToolVersion << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
     << " font-size=\"15\">" << title << "</text>\n";

  // axes
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
     << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";

  const int xstep = std::max(1, static_cast<int>(norms.size() / 10));
  for (std::size_t c = 0; c < norms.size(); c += xstep) {
    const double x = px(static_cast<double>(c));
    os << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\""
       << top + plot_h + 4 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << top + plot_h + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << c
       << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">cycle</text>\n";

  const int dec_lo = static_cast<int>(std::floor(ymin));
  const int dec_hi = static_cast<int>(std::ceil(ymax));
  const int dec_step = std::max(1, (dec_hi - dec_lo) / 8);
  for (int d = dec_lo; d <= dec_hi; d += dec_step) {
    if (d < ymin - 0.5 || d > ymax + 0.5) {
      continue;
    }
    const double y = py(d);
    os << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w << "\" y2=\""
       << y << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d
       << "</text>\n";
  }
  os << "<text x=\"16\" y=\"" << top + plot_h / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        "transform=\"rotate(-90 16 "
     << top + plot_h / 2 << ")\">residual norm</text>\n";

  // curve (positive entries only; exact zeros terminate the polyline)
  os << "<polyline fill=\"none\" stroke=\"#1f66b5\" stroke-width=\"1.6\" points=\"";
  for (std::size_t c = 0; c < norms.size(); ++c) {
    if (norms[c] <= 0.0) {
      break;
    }
    os << px(static_cast<double>(c)) << "," << py(std::log10(norms[c])) << " ";
  }
  os << "\"/>\n";
  for (std::size_t c = 0; c < norms.size(); ++c) {
    if (norms[c] <= 0.0) {
      break;
    }
    os << "<circle cx=\"" << px(static_cast<double>(c)) << "\" cy=\""
       << py(std::log10(norms[c])) << "\" r=\"2.4\" fill=\"#1f66b5\"/>\n";
  }

  if (highlight_cycle && *highlight_cycle + 1 < norms.size() && norms[*highlight_cycle] > 0.0 &&
      norms[*highlight_cycle + 1] > 0.0) {
    const std::size_t k = *highlight_cycle;
    os << "<line x1=\"" << px(static_cast<double>(k)) << "\" y1=\""
       << py(std::log10(norms[k])) << "\" x2=\"" << px(static_cast<double>(k + 1)) << "\" y2=\""
       << py(std::log10(norms[k + 1])) << "\" stroke=\"#c23b22\" stroke-width=\"3\"/>\n";
    os << "<text x=\"" << px(static_cast<double>(k + 1)) + 6 << "\" y=\""
       << py(std::log10(norms[k + 1])) - 6
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#c23b22\">superlinear "
          "segment</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

std::vector<double> residual_norms(const ConvergenceReport& report) {
  std::vector<double> norms{report.initial_norm};
  for (const CycleRecord& rec : report.cycles) {
    norms.push_back(rec.exit_norm);
  }
  return norms;
}

json instance_sidecar(const SystemInstance& sys, const RunConfig& config) {
  json lambdas = json::array();
  if (sys.spectral) {
    for (Complex z : sys.spectral->lambda.entries()) {
      lambdas.push_back(complex_to_json(z));
    }
  }
  return json{{"schema", "sublab-instance/1"},
              {"tool_version", kToolVersion},
              {"n", sys.dim()},
              {"class", to_string(sys.klass)},
              {"seed", sys.seed},
              {"spectrum", config.spectrum},
              {"kappa_v", sys.spectral ? sys.spectral->kappa_v : 1.0},
              {"sigma_min_v", sys.spectral ? sys.spectral->sigma_min_v : 1.0},
              {"eigenvalues", std::move(lambdas)}};
}

SystemInstance load_instance(const fs::path& dir) {
  SystemInstance sys;
  sys.a = read_matrix_market(dir / "A.mtx");
  sys.b = read_matrix_market_vector(dir / "b.mtx");
  sys.x0 = read_matrix_market_vector(dir / "x0.mtx");
  sys.klass = MatrixClass::general;
  const fs::path sidecar = dir / "instance.json";
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    json j = json::parse(in);
    if (j.contains("class")) {
      if (auto klass = matrix_class_from_string(j["class"].get<std::string>())) {
        sys.klass = *klass;
      }
    }
    if (j.contains("seed")) {
      sys.seed = j["seed"].get<std::uint64_t>();
    }
  }
  return sys;
}

void require_m_range(const RunConfig& config, std::size_t n) {
  if (config.m < 1 || config.m + 1 > n) {
    throw contract_error("require 1 <= m <= n-1 (got m=" + std::to_string(config.m) +
                         ", n=" + std::to_string(n) + ")");
  }
}

}  // namespace

int run_gen(const RunConfig& config) {
  SystemInstance sys = make_instance(config);
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  write_matrix_market(sys.a, dir / "A.mtx");
  write_matrix_market(sys.b, dir / "b.mtx");
  write_matrix_market(sys.x0, dir / "x0.mtx");
  write_text_file(dir / "instance.json", instance_sidecar(sys, config).dump(2) + "\n");
  std::cout << "wrote " << to_string(sys.klass) << " instance n=" << sys.dim() << " seed="
            << sys.seed << " to " << dir.string() << "\n";
  return 0;
}

int run_solve(const RunConfig& config) {
  SystemInstance sys =
      config.input_dir.empty() ? make_instance(config) : load_instance(config.input_dir);
  require_m_range(config, sys.dim());

  ConvergenceReport report = restarted_gmres(sys, config.m, config.max_cycles, config.rtol);
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "solve.csv", report_to_csv(report));
  write_text_file(dir / "solve.json", report_to_json_text(report));
  std::cout << "solved n=" << sys.dim() << " m=" << config.m << ": " << report.cycles.size()
            << " cycles, stop=" << to_string(report.stop)
            << ", final residual=" << fmt17(report.residual_norm(report.cycles.size())) << "\n";
  return 0;
}

int run_verify(const RunConfig& config) {
  if (!is_suite_name(config.suite)) {
    std::cerr << "unknown suite '" << config.suite << "'; valid:";
    for (const std::string& name : suite_names()) {
      std::cerr << " " << name;
    }
    std::cerr << "\n";
    return 2;
  }
  SuiteConfig suite_config;
  suite_config.base_seed = config.seed;
  suite_config.floor = config.floor;
  suite_config.max_cycles = config.max_cycles;
  suite_config.figure2_budget = config.budget;

  std::vector<SuiteResult> results;
  if (config.suite == "all") {
    results = run_all_suites(suite_config);
  } else {
    results.push_back(run_suite(config.suite, suite_config));
  }

  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  write_text_file(dir / "verdict.json", verdicts_to_json_text(results, config.suite, suite_config));

  bool all_pass = true;
  for (const SuiteResult& suite : results) {
    std::cout << "suite " << suite.name << ": " << suite.passed() << "/" << suite.records.size()
              << " checks passed\n";
    all_pass = all_pass && suite.all_pass();
  }
  std::cout << "verdict written to " << (dir / "verdict.json").string() << "\n";
  return all_pass ? 0 : 1;
}

int run_figure(const RunConfig& config) {
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);

  if (config.figure == 1) {
    SystemInstance sys = make_instance(config);
    require_m_range(config, sys.dim());
    ConvergenceReport report = restarted_gmres(sys, config.m, config.max_cycles, config.rtol);
    write_text_file(dir / "figure1.csv", report_to_csv(report));
    std::ostringstream title;
    title << "GMRES(" << config.m << ") cycle convergence, " << to_string(sys.klass) << " n="
          << sys.dim();
    write_text_file(dir / "figure1.svg",
                    render_residual_svg(title.str(), residual_norms(report)));
    std::cout << "figure 1: " << report.cycles.size() << " cycles, outputs in " << dir.string()
              << "\n";
    return 0;
  }

  SuiteConfig search_config;
  search_config.base_seed = config.seed;
  search_config.figure2_budget = config.budget;
  search_config.floor = config.floor;
  search_config.max_cycles = config.max_cycles;
  Figure2Search search = find_superlinear_instance(search_config, config.kappa);

  json sidecar{{"schema", "sublab-figure2/1"},
               {"tool_version", kToolVersion},
               {"found", search.found},
               {"seeds_tried", search.seeds_tried},
               {"kappa", search.kappa}};
  if (!search.found) {
    sidecar["note"] = "no ratio drop above 1e-6 found within budget";
    write_text_file(dir / "figure2.json", sidecar.dump(2) + "\n");
    std::cerr << "figure 2: not found within budget (" << search.seeds_tried << " seeds)\n";
    return 1;
  }
  sidecar["seed"] = search.seed;
  sidecar["break_cycle"] = search.break_index;
  sidecar["ratio_drop"] = search.drop;
  write_text_file(dir / "figure2.json", sidecar.dump(2) + "\n");
  write_text_file(dir / "figure2.csv", report_to_csv(search.report));
  std::ostringstream title;
  title << "GMRES(5) cycle convergence, diagonalizable n=100 kappa=" << search.kappa << " seed="
        << search.seed;
  write_text_file(dir / "figure2.svg", render_residual_svg(title.str(),
                                                           residual_norms(search.report),
                                                           search.break_index));
  std::cout << "figure 2: seed " << search.seed << " breaks sublinearity at cycle "
            << search.break_index << " (drop " << fmt17(search.drop) << ")\n";
  return 0;
}

namespace {

// JSON config file values sit between built-in defaults and flags.
void apply_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config '" + path + "'");
  }
  json j = json::parse(in);
  if (j.contains("n")) config.n = j["n"].get<std::size_t>();
  if (j.contains("m")) config.m = j["m"].get<std::size_t>();
  if (j.contains("class")) config.klass = j["class"].get<std::string>();
  if (j.contains("spectrum")) config.spectrum = j["spectrum"].get<std::string>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("kappa")) config.kappa = j["kappa"].get<double>();
  if (j.contains("max-cycles")) config.max_cycles = j["max-cycles"].get<std::size_t>();
  if (j.contains("rtol")) config.rtol = j["rtol"].get<double>();
  if (j.contains("floor")) config.floor = j["floor"].get<double>();
  if (j.contains("out")) config.out_dir = j["out"].get<std::string>();
  if (j.contains("in")) config.input_dir = j["in"].get<std::string>();
  if (j.contains("budget")) config.budget = j["budget"].get<std::size_t>();
  if (j.contains("suite")) config.suite = j["suite"].get<std::string>();
  if (j.contains("which")) config.figure = j["which"].get<int>();
}

void add_common_options(CLI::App* sub, RunConfig& config, std::string& config_path) {
  sub->add_option("--config", config_path, "JSON config file; flags win on conflict");
  sub->add_option("--n", config.n, "problem size");
  sub->add_option("--m", config.m, "restart parameter (1 <= m <= n-1)");
  sub->add_option("--class", config.klass,
                  "matrix class: normal|hermitian|skew-hermitian|diagonalizable-nonnormal");
  sub->add_option("--spectrum", config.spectrum,
                  "eigenvalue recipe, e.g. annulus:1,2 | real-interval:1,2 | pm-pairs:1,2 | "
                  "im-pairs:1,2 | circle:1,0,0.5 | explicit:1+2i,-3");
  sub->add_option("--seed", config.seed, "generator seed (KRYLOV_SUBLAB_SEED overrides default)");
  sub->add_option("--kappa", config.kappa, "eigenvector condition number (diagonalizable class)");
  sub->add_option("--max-cycles", config.max_cycles, "restart cycle cap");
  sub->add_option("--rtol", config.rtol, "relative residual stopping tolerance");
  sub->add_option("--floor", config.floor, "usable-cycle floor relative to ||r_0||");
  sub->add_option("--out", config.out_dir, "output directory");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  RunConfig config;
  std::string config_path;

  // pre-scan so config-file values load before flags are applied
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      config_path = argv[i + 1];
    }
  }
  if (!config_path.empty()) {
    try {
      apply_config_file(config, config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{std::string(kToolVersion) +
               " — restarted GMRES cycle-convergence laboratory for normal and "
               "diagonalizable systems"};
  app.require_subcommand(1);
  std::string dummy_config;

  CLI::App* gen = app.add_subcommand("gen", "generate an instance as Matrix Market files");
  add_common_options(gen, config, dummy_config);

  CLI::App* solve = app.add_subcommand("solve", "run restarted GMRES and emit CSV/JSON reports");
  add_common_options(solve, config, dummy_config);
  solve->add_option("--in", config.input_dir, "instance directory produced by gen");

  CLI::App* verify = app.add_subcommand("verify", "run verification suites");
  add_common_options(verify, config, dummy_config);
  verify->add_option("--suite", config.suite,
                     "lemma1|lemma2|lemma3|theorem1|corollary-n1|corollary-alt|lemma4|all");

  CLI::App* figure = app.add_subcommand("figure", "reproduce the bundled experiments");
  add_common_options(figure, config, dummy_config);
  figure->add_option("--which", config.figure, "1 = normal run, 2 = superlinear search")
      ->check(CLI::Range(1, 2));
  figure->add_option("--budget", config.budget, "seed budget for the superlinear search");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* active = gen->parsed() ? gen : solve->parsed() ? solve
                                     : verify->parsed()    ? verify
                                                           : figure;
  if (active->count("--seed") == 0) {
    if (const char* env = std::getenv("KRYLOV_SUBLAB_SEED")) {
      config.seed = std::strtoull(env, nullptr, 10);
    } else if (figure->parsed()) {
      config.seed = config.figure == 1 ? 42 : 1;
    }
  }
  if (figure->parsed()) {
    if (active->count("--kappa") == 0 && config.figure == 2) {
      config.kappa = 100.0;
    }
    if (active->count("--rtol") == 0) {
      config.rtol = 0.0;  // full curves for the plots
    }
    if (active->count("--n") == 0) {
      config.n = 100;
    }
    if (active->count("--m") == 0) {
      config.m = 5;
    }
  }

  try {
    if (gen->parsed()) return run_gen(config);
    if (solve->parsed()) return run_solve(config);
    if (verify->parsed()) return run_verify(config);
    return run_figure(config);
  } catch (const contract_error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sublab
