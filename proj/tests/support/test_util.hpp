#pragma once

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testing_util {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::filesystem::path models_dir() { return LBE_MODELS_DIR; }

/// Fresh empty directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lbe-" + tag + "-" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct RunResult {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

/// Runs lbeval with a shell-quoted argument string.
inline RunResult run_lbeval(const std::string& args, const std::filesystem::path& scratch) {
  const auto out = scratch / "cli.stdout";
  const auto err = scratch / "cli.stderr";
  const std::string command = std::string("'") + LBEVAL_PATH + "' " + args + " >'" + out.string() + "' 2>'" +
                              err.string() + "'";
  const int status = std::system(command.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = read_file(out);
  r.stderr_text = read_file(err);
  std::filesystem::remove(out);
  std::filesystem::remove(err);
  return r;
}

/// Every regular file under `dir` except the manifest, keyed by name.
inline std::map<std::string, std::string> outputs_without_manifest(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
      files[entry.path().filename().string()] = read_file(entry.path());
  return files;
}

/// The manifest with its timestamp line dropped.
inline std::string manifest_without_timestamp(const std::filesystem::path& dir) {
  std::istringstream in(read_file(dir / "manifest.json"));
  std::string line;
  std::string kept;
  while (std::getline(in, line))
    if (line.find("\"timestamp\"") == std::string::npos) kept += line + "\n";
  return kept;
}

}  // namespace testing_util
