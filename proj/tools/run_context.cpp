#include "run_context.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#ifndef PTDW_VERSION
#define PTDW_VERSION "unknown"
#endif

namespace ptdw::cli {

RunContext::RunContext(std::filesystem::path out_dir, std::string command, int workers)
    : out_dir_(std::move(out_dir)), command_(std::move(command)), workers_(workers),
      start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir_, ec);
  if (ec) throw UsageError("cannot create output directory " + out_dir_.string() + ": " + ec.message());
}

std::filesystem::path RunContext::file(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return out_dir_ / name;
}

void RunContext::write_json(const std::string& name, const json& value) {
  std::ofstream out(file(name));
  if (!out) throw UsageError("cannot write " + (out_dir_ / name).string());
  out << value.dump(2) << '\n';
}

void RunContext::write_manifest(const std::string& status) {
  json m;
  m["command"] = command_;
  m["config"] = config_;
  m["version"] = PTDW_VERSION;
  m["tolerances"] = tolerances_;
  m["workers"] = workers_;
  m["status"] = status;
  m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  json files = json::array();
  for (const auto& name : files_) {
    const auto p = out_dir_ / name;
    if (!std::filesystem::exists(p)) continue;
    files.push_back({{"name", name}, {"bytes", std::filesystem::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  m["outputs"] = files;
  std::ofstream out(out_dir_ / "manifest.json");
  out << m.dump(2) << '\n';
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

int resolve_workers(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("PTDW_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace ptdw::cli
