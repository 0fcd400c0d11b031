#pragma once

// Scratch directories and config builders shared by the test binaries.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#ifndef CACHEGI_DEMO_DIR
#error "CACHEGI_DEMO_DIR must point at demo/loop_order"
#endif

namespace fixture {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string templ = (fs::temp_directory_path() / "cachegi-XXXXXX").string();
    if (!mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const fs::path& p) const { return path_ / p; }

 private:
  fs::path path_;
};

inline fs::path demo_dir() { return fs::path(CACHEGI_DEMO_DIR); }

inline void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text(p)); }

/// A demo config with absolute paths, so it can be written anywhere.
inline nlohmann::json demo_config_json(const std::string& source = "config.json") {
  auto j = read_json(demo_dir() / source);
  for (auto& p : j["target"]["paths"]) p = (demo_dir() / p.get<std::string>()).string();
  j["suite"] = (demo_dir() / j["suite"].get<std::string>()).string();
  if (j.contains("holdout")) j["holdout"] = (demo_dir() / j["holdout"].get<std::string>()).string();
  return j;
}

inline fs::path write_config(const TempDir& dir, const std::string& name, nlohmann::json j, const fs::path& out) {
  j["output_dir"] = out.string();
  const auto path = dir / name;
  write_text(path, j.dump(2));
  return path;
}

inline fs::path demo_config(const TempDir& dir, const std::string& name, const fs::path& out,
                            const std::string& source = "config.json") {
  return write_config(dir, name, demo_config_json(source), out);
}

}  // namespace fixture
