#pragma once

// Shared test utilities: fixture paths, scratch directories, CLI invocation.

#include <unistd.h>

#include <cstdlib>
#include <string>

#include "weakhoi/common.hpp"

#ifndef WEAKHOI_FIXTURE_DIR
#define WEAKHOI_FIXTURE_DIR "tests/fixtures"
#endif
#ifndef WEAKHOI_CLI_BIN
#define WEAKHOI_CLI_BIN "weakhoi"
#endif

namespace testutil {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel) { return fs::path(WEAKHOI_FIXTURE_DIR) / rel; }

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("weakhoi_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the weakhoi binary with the given argument string.
inline CliResult run_cli(const std::string& args, const fs::path& scratch) {
  fs::path out_file = scratch / "_cli_stdout";
  fs::path err_file = scratch / "_cli_stderr";
  std::string cmd = std::string(WEAKHOI_CLI_BIN) + " " + args + " > " + out_file.string() +
                    " 2> " + err_file.string();
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = rc == -1 ? -1 : WEXITSTATUS(rc);
  if (fs::exists(out_file)) r.out = weakhoi::read_file(out_file);
  if (fs::exists(err_file)) r.err = weakhoi::read_file(err_file);
  return r;
}

inline std::string slurp(const fs::path& p) { return weakhoi::read_file(p); }

}  // namespace testutil
