// Command-line front end; talks to the library only through the C API.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pfront/pfront.h"

namespace {

struct Options {
  std::string config;
  std::string out = "out";
  int workers = 0;
  std::vector<std::string> overrides;  // section.key=value
};

int exit_for(pf_status s) {
  if (s == PF_OK) return 0;
  return s == PF_ERR_CONFIG || s == PF_ERR_INVALID_ARG ? 2 : 1;
}

int report(pf_status s) {
  const std::string key = pf_last_error_key();
  std::fprintf(stderr, "error (%s)%s%s: %s\n", pf_status_string(s), key.empty() ? "" : " key=",
               key.c_str(), pf_last_error());
  return exit_for(s);
}

int run(const std::string& scenario, const Options& opt) {
  pf_config* cfg = nullptr;
  pf_status s = pf_config_load(opt.config.c_str(), scenario.c_str(), &cfg);
  if (s != PF_OK) return report(s);
  for (const std::string& o : opt.overrides) {
    const auto dot = o.find('.');
    const auto eq = o.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq) {
      std::fprintf(stderr, "error (configuration error): --set expects section.key=value, got '%s'\n",
                   o.c_str());
      pf_config_free(cfg);
      return 2;
    }
    s = pf_config_set(cfg, o.substr(0, dot).c_str(), o.substr(dot + 1, eq - dot - 1).c_str(),
                      o.substr(eq + 1).c_str());
    if (s != PF_OK) {
      pf_config_free(cfg);
      return report(s);
    }
  }
  if (opt.workers > 0) {
    s = pf_config_set(cfg, "run", "workers", std::to_string(opt.workers).c_str());
    if (s != PF_OK) {
      pf_config_free(cfg);
      return report(s);
    }
  }
  std::printf("config_hash=%s scenario=%s\n", pf_config_hash(cfg), pf_config_scenario(cfg));
  std::fflush(stdout);
  pf_result* res = nullptr;
  s = pf_run(cfg, opt.out.c_str(), &res);
  for (size_t i = 0; i < pf_result_summary_count(res); ++i) std::printf("%s\n", pf_result_summary_line(res, i));
  int code = s == PF_OK ? pf_result_exit_code(res) : report(s);
  pf_result_free(res);
  pf_config_free(cfg);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulsating fronts of periodic bistable reaction-diffusion equations"};
  app.footer(pf_config_help());
  app.require_subcommand(1);
  app.set_version_flag("--version", pf_version());

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"front", "compute the pulsating front, its speed and profile lattice"},
      {"homogenize", "compare fronts for shrinking periods with the homogenized front"},
      {"eigen", "principal periodic eigenvalues and the Dirichlet trace"},
      {"steady", "periodic steady states and their stability classes"},
      {"scan-e", "speed over a list of periods"},
      {"stability", "global stability experiment, period-map spectrum, super/subsolutions"},
      {"decay", "decay exponents from the cell eigenproblem"},
      {"quench-scan", "speed and pinning along the Xin family"},
  };
  std::vector<Options> opts(commands.size());
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, commands[i].second);
    sub->add_option("-c,--config", opts[i].config, "INI experiment file")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", opts[i].out, "output directory")->capture_default_str();
    sub->add_option("-j,--workers", opts[i].workers, "worker threads (overrides run.workers)")
        ->check(CLI::PositiveNumber);
    sub->add_option("-s,--set", opts[i].overrides, "override a key, section.key=value (repeatable)");
    sub->footer(pf_config_help());
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (std::size_t i = 0; i < commands.size(); ++i)
    if (app.got_subcommand(commands[i].first)) return run(commands[i].first, opts[i]);
  return 2;
}
