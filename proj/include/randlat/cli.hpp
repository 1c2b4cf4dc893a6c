#pragma once

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "randlat/harness.hpp"

namespace randlat::cli {

enum Exit { ok = 0, usage = 1, schema = 2, solver = 3, io = 4 };

inline int execute(harness::json j, const std::string& out_override, bool print_only, std::ostream& out,
                   std::ostream& err) {
  harness::RunConfig c;
  try {
    if (!out_override.empty()) j["output"] = out_override;
    c = harness::parse_config(j);
  } catch (const harness::SchemaError& e) {
    err << "schema error at " << e.what() << '\n';
    return schema;
  }
  if (print_only) {
    out << harness::to_json(c).dump(2) << '\n';
    return ok;
  }
  try {
    const auto rep = harness::run(c);
    out << "wrote " << rep.files.size() << " files to " << rep.directory << '\n';
    return ok;
  } catch (const CampaignError& e) {
    err << "solver error in realization " << e.index() << ": " << e.what() << '\n';
    return solver;
  } catch (const csv::IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return io;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return io;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << '\n';
    return solver;
  }
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Random-mass lattice laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset_name;
  std::vector<std::string> sets;
  bool print_only = false;

  auto* run = app.add_subcommand("run", "run a JSON config");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--set", sets, "override a scalar field, key.sub=value");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--print-config", print_only, "print the resolved config and exit");

  auto* pre = app.add_subcommand("preset", "run a figure preset");
  pre->add_option("name", preset_name, "fig1..fig6")->required();
  pre->add_option("--set", sets, "override a scalar field, key.sub=value");
  pre->add_option("--out", out_dir, "output directory");
  pre->add_flag("--print-config", print_only, "print the resolved config and exit");

  auto* list = app.add_subcommand("list-presets", "list the figure presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  }

  if (list->parsed()) {
    for (const auto& [name, j] : harness::presets()) out << name << "  " << harness::describe_preset(j) << '\n';
    return ok;
  }

  harness::json j;
  if (run->parsed()) {
    std::ifstream f(config_path);
    if (!f) {
      err << "i/o error: cannot read " << config_path << '\n';
      return io;
    }
    try {
      j = harness::json::parse(f);
    } catch (const harness::json::exception& e) {
      err << "schema error at $: not valid JSON (" << e.what() << ")\n";
      return schema;
    }
  } else {
    const auto all = harness::presets();
    const auto it = all.find(preset_name);
    if (it == all.end()) {
      err << "unknown preset '" << preset_name << "' (see list-presets)\n";
      return usage;
    }
    j = it->second;
    if (out_dir.empty()) out_dir = harness::default_output(preset_name);
  }
  try {
    for (const auto& s : sets) harness::apply_override(j, s);
  } catch (const harness::SchemaError& e) {
    err << "schema error at " << e.what() << '\n';
    return schema;
  }
  return execute(std::move(j), out_dir, print_only, out, err);
}

}  // namespace randlat::cli
