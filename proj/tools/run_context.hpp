#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ptdw/common.hpp"

namespace ptdw::cli {

using json = nlohmann::json;

inline json to_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

/// Output directory, manifest bookkeeping and the worker count of one CLI run.
class RunContext {
 public:
  RunContext(std::filesystem::path out_dir, std::string command, int workers);

  /// Registers `name` as an output of this run and returns its full path.
  std::filesystem::path file(const std::string& name);
  void write_json(const std::string& name, const json& value);

  int workers() const { return workers_; }
  json& config() { return config_; }
  json& tolerances() { return tolerances_; }

  /// manifest.json: command, configuration, version, tolerances, wall time and digests.
  void write_manifest(const std::string& status);

 private:
  std::filesystem::path out_dir_;
  std::string command_;
  int workers_;
  json config_ = json::object();
  json tolerances_ = json::object();
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Runs f(0..n-1) on up to `workers` threads; results are written by index, so the output
/// order does not depend on scheduling.  The first exception is rethrown.
template <class F>
void parallel_for(int n, int workers, F&& f) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Worker count: flag value if > 0, else PTDW_WORKERS, else hardware concurrency.
int resolve_workers(int flag);

}  // namespace ptdw::cli
