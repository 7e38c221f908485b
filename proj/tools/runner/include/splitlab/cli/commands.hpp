#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace splitlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "results.csv";
};

struct ReportOptions {
  std::filesystem::path in;
  std::optional<std::filesystem::path> json;
};

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err);
int report_command(const ReportOptions& options, std::ostream& out, std::ostream& err);

/// Full command line entry point (run / report subcommands).
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace splitlab::cli
