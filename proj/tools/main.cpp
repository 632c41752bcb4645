#include "commands.hpp"
#include "config.hpp"

#include "kd/error.hpp"
#include "kd/version.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
  using namespace kd::cli;

  CLI::App app{"Sequential kernel change detection"};
  app.set_version_flag("--version", std::string("kd ") + kd::version);
  app.require_subcommand(1);

  struct Flags
  {
    std::string config;
    std::string out;
    bool to_stdout = false;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::string input;
  };
  Flags flags;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"solve-delay", "asymptotic normed delay rho0 for a kernel and alternative"},
      {"optimal-kernel", "optimal pair (rho*, K*) for an alternative"},
      {"monitor", "run the detector over a (time, value) CSV stream"},
      {"montecarlo", "normed-delay convergence study over bandwidths"},
      {"false-alarm", "in-control alarm rates, optionally calibrating c"},
      {"select-kernel", "pick the candidate kernel with the smallest rho0"},
      {"oracle", "LP probe of the reachable set"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", flags.config, "config file")->check(CLI::ExistingFile);
    auto* out = sub->add_option("-o,--out", flags.out, "output directory");
    auto* so = sub->add_flag("--stdout", flags.to_stdout, "print the main JSON document instead of writing files");
    so->excludes(out);
    sub->add_option("--seed", flags.seed, "master seed (overrides study.seed)");
    sub->add_option("--set", flags.overrides, "override, section.key=value")->take_all();
    if (name == "monitor")
      sub->add_option("--input", flags.input, "stream CSV (overrides monitor.input)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = flags.config.empty() ? RunConfig{} : RunConfig::load(flags.config);
    for (const auto& o : flags.overrides)
      cfg.apply_override(o);
    if (!flags.input.empty())
      cfg.apply_override("monitor.input=" + flags.input);
    if (flags.seed)
      cfg.set("study", "seed", std::to_string(*flags.seed));
    else if (!cfg.has("study", "seed"))
      cfg.set("study", "seed", "1");

    Output out;
    out.to_stdout = flags.to_stdout;
    if (!flags.out.empty())
      out.dir = flags.out;
    else
      out.dir = cfg.get_or("output", "dir", "kd_out");
    return dispatch(command, cfg, out);
  } catch (const kd::Error& e) {
    std::cerr << "kd: " << e.what() << '\n';
    return exit_config;
  }
}
