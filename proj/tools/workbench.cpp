#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rfc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time DOb/RTOb force-control workbench"};
  app.require_subcommand(1);

  rfc::cli::CommandOptions opts;
  std::string gains;
  std::uint64_t seed = 0;

  struct Sub {
    const char* name;
    const char* help;
    bool needs_out;
  };
  const Sub subs[] = {
      {"freqresp", "Frequency responses of the inner-loop S and T", true},
      {"bodeintegral", "Discrete Bode sensitivity integral of the inner loop", false},
      {"rootlocus", "Root locus of the force loop over the force gain", true},
      {"simulate", "Closed-loop time-domain simulation", true},
      {"sweep", "Design-space sweep", true},
  };
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--config", opts.config, "Configuration file")->required()->check(CLI::ExistingFile);
    auto* out = sub->add_option("--out", opts.out, "Output file");
    if (s.needs_out) out->required();
    if (std::string(s.name) == "rootlocus") sub->add_option("--gains", gains, "Gain range lo:hi:n");
    if (std::string(s.name) == "simulate") sub->add_option("--seed", seed, "Noise seed override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rfc::cli::kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  if (!gains.empty()) opts.gains = gains;
  if (sub->get_name() == "simulate" && sub->count("--seed") > 0) opts.seed = seed;
  return rfc::cli::run_command(name, opts, std::cout, std::cerr);
}
