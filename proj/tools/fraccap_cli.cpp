#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "fraccap/cli.hpp"

namespace fc = fraccap::cli;

int main(int argc, char** argv) {
  CLI::App app{"fraccap: fractional caloric capacity experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config;
    std::string out = "fraccap-out";
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& schema : fc::schemas()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(schema.name, schema.help);
    b->sub->add_option("--config", b->config, "key = value file; flags override it");
    b->sub->add_option("--out", b->out, "output directory")->capture_default_str();
    auto add = [&](const fc::ParamSpec& p) {
      std::string help = p.help;
      if (!p.fallback.empty()) help += " (default " + p.fallback + ")";
      b->options[p.key] = b->sub->add_option("--" + p.key, b->values[p.key], help);
    };
    for (const auto& p : schema.params) add(p);
    for (const auto& p : fc::common_params()) add(p);
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  for (const auto& b : bound) {
    if (!b->sub->parsed()) continue;
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : b->options)
      if (opt->count() > 0) flags[key] = b->values[key];
    try {
      auto cfg = fc::resolve(b->sub->get_name(), b->config, flags, b->out);
      return fc::run(std::move(cfg), std::cerr);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
