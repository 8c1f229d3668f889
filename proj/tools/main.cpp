#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>
#include <thread>

#include "cli.hpp"

using namespace oscres::cli;

int main(int argc, char** argv) {
  CLI::App app{"Resonances of Schroedinger operators with oscillating potentials"};
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
  std::string spec, out, method = "ode";
  std::vector<double> region, lambda_sweep;

  const std::map<std::string, Command> commands{
      {"effpot", Command::effpot},         {"resonances", Command::resonances}, {"step", Command::step},
      {"transmission", Command::transmission}, {"escape", Command::escape},   {"expansion", Command::expansion},
  };
  const std::map<std::string, const char*> help{
      {"effpot", "Effective potential W_0 - eps^2 Lambda_0 - eps^3 Lambda_1 per eps (CSV)"},
      {"resonances", "Resonances of V_eps in a region by ODE and/or Fredholm determinant (CSV)"},
      {"step", "Resonance of the alternating step potential over a sweep of n (CSV)"},
      {"transmission", "Transmission of V_eps against the effective potential along real lambda (CSV)"},
      {"escape", "Maximal Im of resonances as eps decreases, W_0 = 0 (CSV)"},
      {"expansion", "Order verdicts for the resonance expansion (JSON)"},
  };

  for (const auto& [name, cmd] : commands) {
    CLI::App* sc = app.add_subcommand(name, help.at(name));
    sc->add_option("--spec", spec, "Potential spec JSON");
    sc->add_option("--out", out, "Output file (default: standard output)");
    sc->add_option("--eps", cfg.eps_list, "Comma-separated eps values")->delimiter(',');
    sc->add_option("--region", region, "Search region re_min,re_max,im_min,im_max")->delimiter(',')->expected(4);
    sc->add_option("--method", method, "Determinant: ode, fredholm or both")
        ->check(CLI::IsMember({"ode", "fredholm", "both"}));
    sc->add_option("--order", cfg.order, "Effective-potential order (2 or 3)")->check(CLI::IsMember({2, 3}));
    sc->add_option("--nodes", cfg.nodes, "Nystrom nodes for the Fredholm determinant");
    sc->add_option("--jobs", cfg.jobs, "Worker threads");
    sc->add_flag("--strict", cfg.strict, "Exit with status 4 when a verdict fails");
    sc->add_option("--seed", cfg.seed, "Seed for contour jitter");
    sc->add_option("--n", cfg.step_n, "Comma-separated step indices (step)")->delimiter(',');
    sc->add_option("--lambda", lambda_sweep, "lo,hi,count of real momenta (transmission)")
        ->delimiter(',')
        ->expected(3);
    sc->callback([&cfg, cmd = cmd] { cfg.command = cmd; });
  }

  try {
    app.parse(argc, argv);
    if (!spec.empty()) cfg.potential_spec_path = spec;
    if (!out.empty()) cfg.output_path = out;
    cfg.method = method == "both" ? MethodChoice::both : method == "fredholm" ? MethodChoice::fredholm
                                                                              : MethodChoice::ode;
    if (!region.empty()) cfg.region = oscres::SearchRegion(region[0], region[1], region[2], region[3]);
    if (!lambda_sweep.empty()) {
      if (lambda_sweep[2] != static_cast<int>(lambda_sweep[2])) throw CLI::ValidationError("--lambda count must be an integer");
      cfg.sweep = {lambda_sweep[0], lambda_sweep[1], static_cast<int>(lambda_sweep[2])};
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  } catch (const std::invalid_argument& e) {
    std::cerr << nlohmann::ordered_json{{"error", "parse"}, {"message", e.what()}}.dump(2) << '\n';
    return kParseError;
  }
  return run(cfg, std::cout, std::cerr);
}
