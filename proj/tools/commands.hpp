#pragma once

#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "run_context.hpp"

namespace ptdw::cli {

struct GlobalOptions {
  std::string out_dir = "ptdw_out";
  int workers = 0;
};

class Command {
 public:
  virtual ~Command() = default;
  /// Registers the subcommand and its options on `app`.
  virtual CLI::App* attach(CLI::App& app) = 0;
  virtual void run(RunContext& ctx) = 0;
};

std::vector<std::unique_ptr<Command>> make_commands();

/// "170deg", "0.5rad" or a bare number (radians).
double parse_angle(const std::string& text);

}  // namespace ptdw::cli
