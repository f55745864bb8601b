// ptdw: command line front end for the ptdw library.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_context.hpp"

namespace {

using namespace ptdw;
using namespace ptdw::cli;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value file; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return kv;
}

// Snapshot of every option of the chosen subcommand and the globals, after parsing.
json snapshot(const CLI::App& app, const CLI::App& sub) {
  json cfg = json::object();
  auto add = [&](const CLI::App& a) {
    for (const CLI::Option* o : a.get_options()) {
      if (o->get_lnames().empty() || o->get_lnames()[0] == "help") continue;
      const std::string key = o->get_lnames()[0];
      if (o->count() > 0) {
        const auto& r = o->results();
        cfg[key] = r.size() == 1 ? json(r[0]) : json(r);
      } else {
        cfg[key] = o->get_default_str();
      }
    }
  };
  add(app);
  add(sub);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalues, nodes and level crossings of PT-symmetric cubic double wells"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--out", global.out_dir, "Output directory")->capture_default_str();
  app.add_option("--workers", global.workers, "Worker threads (0: PTDW_WORKERS or hardware)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  std::string config_path;
  app.add_option("--config", config_path, "key = value file; flags given on the command line win");

  std::vector<std::unique_ptr<Command>> commands = make_commands();
  std::map<CLI::App*, Command*> by_app;
  for (auto& c : commands) by_app[c->attach(app)] = c.get();

  // Splice the config file in front of the command line, skipping keys the user set explicitly.
  std::vector<std::string> args(argv + 1, argv + argc);
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  try {
    if (!config_path.empty()) {
      std::set<std::string> given;
      for (const auto& a : args) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
      }
      size_t sub_pos = args.size();
      CLI::App* sub = nullptr;
      for (size_t i = 0; i < args.size() && !sub; ++i) {
        for (auto& [a, c] : by_app) {
          if (args[i] == a->get_name()) {
            sub = a;
            sub_pos = i;
          }
        }
      }
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config(config_path)) {
        if (given.count(key) || key == "config") continue;
        const CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
        if (!opt) opt = app.get_option_no_throw("--" + key);
        if (!opt) throw UsageError("unknown config key '" + key + "'");
        if (opt->get_expected_max() == 0) {
          if (value == "true" || value == "1") injected.push_back("--" + key);
          continue;
        }
        injected.push_back("--" + key);
        std::string item;
        std::stringstream ss(value);
        while (std::getline(ss, item, ',')) injected.push_back(trim(item));
      }
      args.insert(args.begin() + std::ptrdiff_t(std::min(sub_pos + 1, args.size())), injected.begin(), injected.end());
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  Command* cmd = by_app.at(chosen);
  std::unique_ptr<RunContext> ctx;
  try {
    ctx = std::make_unique<RunContext>(global.out_dir, chosen->get_name(), resolve_workers(global.workers));
    ctx->config() = snapshot(app, *chosen);
    cmd->run(*ctx);
    ctx->write_manifest("ok");
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure (" << to_string(e.kind()) << "): " << e.what() << '\n';
    if (ctx) {
      ctx->write_json("diagnostics.json", {{"kind", to_string(e.kind())}, {"message", e.what()}});
      ctx->write_manifest("numerical_failure");
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (ctx) {
      ctx->write_json("diagnostics.json", {{"kind", "other"}, {"message", e.what()}});
      ctx->write_manifest("failure");
    }
    return 1;
  }
}
