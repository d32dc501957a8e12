#include "parisi/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "parisi/chaos.hpp"
#include "parisi/errors.hpp"
#include "parisi/montecarlo.hpp"
#include "parisi/parisi_solver.hpp"
#include "parisi/serialization.hpp"

namespace parisi {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string output_dir;
  bool compact = false;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--output-dir", common.output_dir, "Directory for result and manifest files");
  sub->add_flag("--json", common.compact, "Print compact single-line JSON");
}

std::uint64_t resolve_seed(std::uint64_t seed) {
  if (const char* env = std::getenv("PARISI_SPHERE_SEED")) {
    try {
      size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ParseError(std::string("PARISI_SPHERE_SEED is not an unsigned integer: ") + env);
    }
  }
  return seed;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

std::string dump(const Json& j, bool compact) { return compact ? j.dump() : j.dump(2); }

// Result JSON on stdout; with --output-dir, the same JSON plus a manifest.
void emit(const Common& common, const std::string& command, const Json& params, std::uint64_t seed,
          Json result, std::ostream& out) {
  RunManifest manifest;
  manifest.command = command;
  manifest.parameters = params;
  manifest.master_seed = seed;
  manifest.started = utc_timestamp();
  const std::string file = command + ".json";
  if (!common.output_dir.empty()) manifest.outputs = {file, "manifest.json"};
  result["manifest_hash"] = manifest.hash();
  if (!common.output_dir.empty()) {
    fs::create_directories(common.output_dir);
    write_file(fs::path(common.output_dir) / file, result.dump(2) + "\n");
    manifest.finished = utc_timestamp();
    write_file(fs::path(common.output_dir) / "manifest.json", manifest.to_json().dump(2) + "\n");
  }
  out << dump(result, common.compact) << "\n";
}

ParisiMeasure load_measure(const std::string& inline_json, const std::string& path) {
  std::string text = inline_json;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot read measure file " + path);
    std::ostringstream os;
    os << f.rdbuf();
    text = os.str();
  }
  if (text.empty()) throw ParseError("a measure is required (--measure or --measure-file)");
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("measure is not valid JSON: ") + e.what());
  }
  return measure_from_json(j);
}

Perturbation parse_perturbation(const std::string& text) {
  Perturbation p;
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> p.p0 >> c1 >> p.p >> c2 >> p.a) || c1 != ',' || c2 != ',' || !is.eof())
    throw ParseError("--perturb expects p0,p,a (e.g. 4,2,0.2)");
  return p;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parisi measures, temperature chaos checks and Monte Carlo for spherical mixed "
               "p-spin models. Mixture coefficients are gamma_p, so xi(x) = sum gamma_p^2 x^p."};
  app.require_subcommand(1);
  Common common;
  std::function<int()> action;

  // solve
  std::string xi;
  double beta = 0.0, beta1 = 0.0, beta2 = 0.0;
  std::uint64_t seed = 0;
  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Compute the Parisi measure");
  solve->add_option("--xi", xi, "Mixture as p:gamma_p,... (gamma_p, not its square)")->required();
  solve->add_option("--beta", beta, "Inverse temperature")->required();
  solve->add_option("--seed", seed, "Seed for k-RSB restarts");
  solve->add_option("--restarts", solve_opts.restarts, "k-RSB restarts per k");
  solve->add_option("--grid", solve_opts.certificate_grid, "Certificate grid size");
  solve->add_option("--tol-sup", solve_opts.tol_sup, "Certificate tolerance for sup f");
  solve->add_option("--tol-supp", solve_opts.tol_supp, "Certificate tolerance for |f| on the support");
  add_common(solve, common);
  solve->callback([&] {
    action = [&] {
      const MixtureSpec spec = parse_mixture(xi);
      solve_opts.seed = resolve_seed(seed);
      const ParisiSolution sol = parisi_solve(spec, beta, solve_opts);
      const Json params{{"xi", format_mixture(spec)},
                        {"beta", beta},
                        {"restarts", solve_opts.restarts},
                        {"grid", solve_opts.certificate_grid},
                        {"tol_sup", solve_opts.tol_sup},
                        {"tol_supp", solve_opts.tol_supp}};
      emit(common, "solve", params, solve_opts.seed, to_json(sol), out);
      return sol.converged ? kExitOk : kExitNonConvergence;
    };
  });

  // certify and cs-eval share the measure input
  std::string measure_text, measure_file;
  int grid = 10000;
  double tol_sup = 1e-6, tol_supp = 1e-6;
  auto* cert = app.add_subcommand("certify", "Run the optimality certificate on a measure");
  cert->add_option("--xi", xi, "Mixture as p:gamma_p,...")->required();
  cert->add_option("--beta", beta, "Inverse temperature")->required();
  cert->add_option("--measure", measure_text, "Measure JSON");
  cert->add_option("--measure-file", measure_file, "File holding the measure JSON");
  cert->add_option("--grid", grid, "Certificate grid size");
  cert->add_option("--tol-sup", tol_sup, "Tolerance for sup f");
  cert->add_option("--tol-supp", tol_supp, "Tolerance for |f| on the support");
  add_common(cert, common);
  cert->callback([&] {
    action = [&] {
      const MixtureSpec spec = parse_mixture(xi);
      const ParisiMeasure measure = load_measure(measure_text, measure_file);
      const Certificate c = certify(spec, beta, measure, grid, tol_sup, tol_supp);
      const Json params{{"xi", format_mixture(spec)}, {"beta", beta}, {"measure", to_json(measure)},
                        {"grid", grid},               {"tol_sup", tol_sup}, {"tol_supp", tol_supp}};
      emit(common, "certify", params, 0,
           Json{{"certificate", to_json(c)}, {"cs_value", cs_value(spec, beta, measure)}}, out);
      return kExitOk;
    };
  });

  auto* cs = app.add_subcommand("cs-eval", "Evaluate the Crisanti-Sommers functional");
  cs->add_option("--xi", xi, "Mixture as p:gamma_p,...")->required();
  cs->add_option("--beta", beta, "Inverse temperature")->required();
  cs->add_option("--measure", measure_text, "Measure JSON");
  cs->add_option("--measure-file", measure_file, "File holding the measure JSON");
  add_common(cs, common);
  cs->callback([&] {
    action = [&] {
      const MixtureSpec spec = parse_mixture(xi);
      const ParisiMeasure measure = load_measure(measure_text, measure_file);
      const Json params{{"xi", format_mixture(spec)}, {"beta", beta}, {"measure", to_json(measure)}};
      emit(common, "cs-eval", params, 0, Json{{"cs_value", cs_value(spec, beta, measure)}}, out);
      return kExitOk;
    };
  });

  // chaos {thm1, thm2, demo-frsb}
  auto* chaos = app.add_subcommand("chaos", "Temperature chaos hypotheses");
  chaos->require_subcommand(1);
  int p0 = 4, p = 2;
  double a = 0.2, c = 0.07;
  bool assert_generic = false;
  auto* thm1 = chaos->add_subcommand("thm1", "Perturbed pure p0-spin hypotheses");
  thm1->add_option("--p0", p0, "Degree of the pure model")->required();
  thm1->add_option("--p", p, "Degree of the perturbation")->required();
  thm1->add_option("--a", a, "Perturbation exponent")->required();
  thm1->add_option("--beta1", beta1)->required();
  thm1->add_option("--beta2", beta2)->required();
  add_common(thm1, common);
  thm1->callback([&] {
    action = [&] {
      const ChaosReport r = theorem1_check(p0, p, a, beta1, beta2);
      const Json params{{"p0", p0}, {"p", p}, {"a", a}, {"beta1", beta1}, {"beta2", beta2}};
      emit(common, "chaos-thm1", params, 0, to_json(r), out);
      return kExitOk;
    };
  });
  auto* thm2 = chaos->add_subcommand("thm2", "Uncoupled-measure hypotheses for a mixture");
  thm2->add_option("--xi", xi, "Even mixture as p:gamma_p,...")->required();
  thm2->add_option("--beta1", beta1)->required();
  thm2->add_option("--beta2", beta2)->required();
  thm2->add_flag("--assert-generic", assert_generic, "Assert that the model is generic");
  thm2->add_option("--seed", seed, "Seed for k-RSB restarts");
  add_common(thm2, common);
  thm2->callback([&] {
    action = [&] {
      const MixtureSpec spec = parse_mixture(xi);
      SolveOptions opts;
      opts.seed = resolve_seed(seed);
      const ChaosReport r = theorem2_check(spec, beta1, beta2, assert_generic, opts);
      const Json params{{"xi", format_mixture(spec)}, {"beta1", beta1}, {"beta2", beta2},
                        {"assert_generic", assert_generic}};
      emit(common, "chaos-thm2", params, opts.seed, to_json(r), out);
      const bool certified = std::all_of(r.witnesses.begin(), r.witnesses.end(),
                                         [](const TemperatureWitness& w) { return w.certified; });
      return certified ? kExitOk : kExitNonConvergence;
    };
  });
  auto* demo = chaos->add_subcommand("demo-frsb", "FRSB pair violating the uncoupled condition");
  demo->add_option("--c", c, "Weight of the degree-p term in xi")->required();
  demo->add_option("--p", p, "Even degree >= 4")->required();
  demo->add_option("--beta1", beta1)->required();
  demo->add_option("--beta2", beta2)->required();
  add_common(demo, common);
  demo->callback([&] {
    action = [&] {
      const ChaosReport r = frsb_coupling_demo(c, p, beta1, beta2);
      const Json params{{"c", c}, {"p", p}, {"beta1", beta1}, {"beta2", beta2}};
      emit(common, "chaos-demo-frsb", params, 0, to_json(r), out);
      return kExitOk;
    };
  });

  // simulate
  SimConfig sim;
  std::string perturb;
  bool dump_samples = false, no_predictions = false;
  auto* simulate = app.add_subcommand("simulate", "Two-temperature overlap simulation");
  simulate->add_option("--xi", xi, "Mixture as p:gamma_p,...")->required();
  simulate->add_option("--N", sim.N, "Dimension")->required();
  simulate->add_option("--beta1", sim.beta1)->required();
  simulate->add_option("--beta2", sim.beta2)->required();
  simulate->add_option("--samples", sim.mcmc.n_samples, "Samples per chain");
  simulate->add_option("--disorders", sim.n_disorder, "Disorder realizations");
  simulate->add_option("--burn-in", sim.mcmc.burn_in, "Proposals discarded per chain");
  simulate->add_option("--thin", sim.mcmc.thin, "Proposals between samples");
  simulate->add_option("--step", sim.mcmc.step, "Proposal step in (0, 1]");
  simulate->add_flag("--auto-tune", sim.mcmc.auto_tune, "Tune the step toward acceptance 0.4");
  simulate->add_option("--perturb", perturb, "p0,p,a: add N^{-a} H_{N,p} to the pure p0 model");
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--jobs", sim.jobs, "Worker threads over disorder replicas");
  simulate->add_flag("--dump-samples", dump_samples, "Also write raw overlap samples");
  simulate->add_flag("--no-predictions", no_predictions, "Skip predicted-atom overlays");
  add_common(simulate, common);
  simulate->callback([&] {
    action = [&] {
      sim.spec = parse_mixture(xi);
      if (!perturb.empty()) sim.perturbation = parse_perturbation(perturb);
      sim.master_seed = resolve_seed(seed);
      sim.predictions = !no_predictions;
      validate(sim);
      check_budget(sim.spec, sim.N, sim.perturbation);

      RunManifest manifest;
      manifest.command = "simulate";
      manifest.master_seed = sim.master_seed;
      manifest.parameters = {{"xi", format_mixture(sim.spec)},
                             {"N", sim.N},
                             {"beta1", sim.beta1},
                             {"beta2", sim.beta2},
                             {"samples", sim.mcmc.n_samples},
                             {"disorders", sim.n_disorder},
                             {"burn_in", sim.mcmc.burn_in},
                             {"thin", sim.mcmc.thin},
                             {"step", sim.mcmc.step},
                             {"auto_tune", sim.mcmc.auto_tune},
                             {"predictions", sim.predictions},
                             {"gamma_perturbation", 1.0}};
      if (sim.perturbation)
        manifest.parameters["perturbation"] = {
            {"p0", sim.perturbation->p0}, {"p", sim.perturbation->p}, {"a", sim.perturbation->a}};
      manifest.outputs = {"summary.json", "hist_same_beta1.csv", "hist_same_beta2.csv",
                          "hist_cross.csv"};
      if (dump_samples) manifest.outputs.push_back("samples.csv");
      manifest.outputs.push_back("manifest.json");
      manifest.started = utc_timestamp();
      const std::string hash = manifest.hash();

      const OverlapStats stats = chaos_experiment(sim);
      Json summary = to_json(stats);
      summary["manifest_hash"] = hash;
      summary["parameters"] = manifest.parameters;

      const fs::path dir = common.output_dir.empty() ? fs::path(".") : fs::path(common.output_dir);
      fs::create_directories(dir);
      write_file(dir / "summary.json", summary.dump(2) + "\n");
      write_file(dir / "hist_same_beta1.csv", histogram_csv(stats.same1.histogram, hash));
      write_file(dir / "hist_same_beta2.csv", histogram_csv(stats.same2.histogram, hash));
      write_file(dir / "hist_cross.csv", histogram_csv(stats.cross.histogram, hash));
      if (dump_samples) {
        std::ostringstream os;
        os << "# manifest " << hash << "\npair,overlap\n";
        os.precision(17);
        for (double r : stats.same1.samples) os << "same_beta1," << r << "\n";
        for (double r : stats.same2.samples) os << "same_beta2," << r << "\n";
        for (double r : stats.cross.samples) os << "cross," << r << "\n";
        write_file(dir / "samples.csv", os.str());
      }
      manifest.finished = utc_timestamp();
      write_file(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
      if (common.compact)
        out << summary.dump() << "\n";
      else
        out << (dir / "summary.json").string() << "\n";
      return kExitOk;
    };
  });

  // covariance-selftest
  int n = 16, pairs = 20, draws = 20000, jobs = 1;
  auto* cov = app.add_subcommand("covariance-selftest", "Check E H(s1) H(s2) = N xi(R)");
  cov->add_option("--xi", xi, "Mixture as p:gamma_p,...")->required();
  cov->add_option("--N", n, "Dimension");
  cov->add_option("--pairs", pairs, "Sphere pairs");
  cov->add_option("--draws", draws, "Disorder draws");
  cov->add_option("--seed", seed, "Seed");
  cov->add_option("--jobs", jobs, "Worker threads");
  add_common(cov, common);
  cov->callback([&] {
    action = [&] {
      const MixtureSpec spec = parse_mixture(xi);
      const std::uint64_t s = resolve_seed(seed);
      const CovarianceReport r = covariance_selftest(spec, n, pairs, draws, s, jobs);
      const Json params{{"xi", format_mixture(spec)}, {"N", n}, {"pairs", pairs}, {"draws", draws}};
      emit(common, "covariance-selftest", params, s, to_json(r), out);
      return r.max_abs_z <= 4.0 ? kExitOk : kExitNonConvergence;
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
  if (!action) {
    err << app.help();
    return kExitUsage;
  }
  try {
    return action();
  } catch (const BudgetError& e) {
    err << "budget: " << e.what() << "\n";
    return kExitBudget;
  } catch (const NoInteriorSolution& e) {
    err << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const ParseError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionFailed& e) {
    err << "precondition: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace parisi
