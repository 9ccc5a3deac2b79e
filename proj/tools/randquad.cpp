// randquad: command-line front end. One subcommand per operation, flags
// generated from the config schema; `run --config FILE` takes the command
// from the file.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "randquad/error.hpp"
#include "randquad/harness/config.hpp"
#include "randquad/harness/experiments.hpp"
#include "randquad/harness/report.hpp"
#include "randquad/parallel.hpp"

namespace rh = randquad::harness;

namespace {

std::string flag_name(const std::string& key) {
  std::string out = key;
  for (char& ch : out) {
    if (ch == '_') ch = '-';
  }
  return out;
}

struct Subcommand {
  CLI::App* app = nullptr;
  std::string command;  // empty for `run`
  std::string config_path;
  bool dump_config = false;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_key_options(Subcommand& sub, const std::vector<std::string>& keys, const std::string& default_command) {
  const rh::ExperimentConfig defaults(default_command);
  for (const std::string& key : keys) {
    const rh::ConfigKey* k = rh::find_key(key);
    std::string help = k->help;
    if (!k->unit.empty()) help += " [" + k->unit + "]";
    help += " (default " + (sub.command.empty() ? k->default_value : defaults.raw(key)) + ")";
    std::string names = "--" + flag_name(key);
    if (flag_name(key) != key) names += ",--" + key;
    static const std::map<rh::ValueType, std::string> type_names = {
        {rh::ValueType::String, "TEXT"}, {rh::ValueType::Integer, "INT"}, {rh::ValueType::Real, "REAL"},
        {rh::ValueType::Complex, "RE,IM"}, {rh::ValueType::RealList, "REAL,..."}};
    sub.options[key] = sub.app->add_option(names, sub.values[key], help)->type_name(type_names.at(k->type));
  }
}

int exit_code_for(const randquad::Error& e) {
  switch (e.code()) {
    case randquad::ErrorCode::IoError: return rh::kExitIoError;
    case randquad::ErrorCode::ConfigError:
    case randquad::ErrorCode::InsideMandelbrot:
    case randquad::ErrorCode::NotPerturbation:
    case randquad::ErrorCode::PrefixTooShort:
    case randquad::ErrorCode::TreeTooDeep: return rh::kExitConfigError;
    default: return rh::kExitClaimFailed;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randquad: random iteration of z^2 + c, Green's function and harmonic-measure experiments"};
  app.require_subcommand(1);
  std::map<std::string, Subcommand> subs;

  for (const std::string& command : rh::command_names()) {
    Subcommand& sub = subs[command];
    sub.command = command;
    sub.app = app.add_subcommand(command, rh::command_help(command));
    sub.app->add_option("--config", sub.config_path, "config file; flags override its values");
    sub.app->add_flag("--dump-config", sub.dump_config, "print the resolved config and exit");
    add_key_options(sub, rh::command_keys(command), command);
  }
  {
    Subcommand& sub = subs["run"];
    sub.app = app.add_subcommand("run", "run the command named in a config file");
    sub.app->add_option("--config", sub.config_path, "config file with a `command = ...` line")->required();
    sub.app->add_flag("--dump-config", sub.dump_config, "print the resolved config and exit");
    std::vector<std::string> all;
    for (const rh::ConfigKey& k : rh::config_schema()) all.push_back(k.name);
    add_key_options(sub, all, "verify-all");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return rh::kExitConfigError;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    Subcommand* active = nullptr;
    for (auto& [name, sub] : subs) {
      if (sub.app->parsed()) active = &sub;
    }
    rh::ExperimentConfig config;
    if (!active->config_path.empty()) config = rh::ExperimentConfig::load(active->config_path);
    if (!active->command.empty()) config.set_command(active->command);
    for (const auto& [key, option] : active->options) {
      if (option->count() > 0) config.set(key, active->values[key]);
    }
    if (active->dump_config) {
      std::cout << config.serialize();
      return rh::kExitOk;
    }

    const rh::ExperimentReport report = rh::run_experiment(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string out = config.raw("out");
    rh::write_run_directory(report, config, out, seconds);

    for (const rh::Claim& c : report.claims) {
      std::printf("[%s] %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                  c.detail.c_str());
    }
    std::printf("%s: %s in %.1f s with %u thread(s); report %s/report.json\n", config.command().c_str(),
                report.all_pass() ? "ok" : "FAILED", seconds,
                randquad::resolve_threads(static_cast<unsigned>(config.count("threads"))), out.c_str());
    if (!report.all_pass()) {
      for (const std::string& f : report.failures()) std::fprintf(stderr, "failed: %s\n", f.c_str());
      return rh::kExitClaimFailed;
    }
    return rh::kExitOk;
  } catch (const randquad::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: ConfigError: %s\n", e.what());
    return rh::kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return rh::kExitClaimFailed;
  }
}
