#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace bergman::cli {

// Numerical failure inside a command, tagged with the failing operation.
class CommandError : public std::runtime_error {
 public:
  CommandError(std::string operation, const std::string& what)
      : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

struct RunOptions {
  int threads = 1;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
  std::optional<Format> format;
};

struct SideFile {
  std::string suffix;  // appended to the output stem, e.g. ".margins.csv"
  std::string content;
};

struct RunOutput {
  Format format = Format::json;
  std::string path;  // empty means stdout
  std::string content;
  std::vector<SideFile> side_files;
};

// Runs the command and renders every artifact in memory; nothing is written.
RunOutput execute(const RunManifest& manifest, const RunOptions& options);

// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::string& path, const std::string& content);

// Writes the main output (or prints it) plus side files next to it.
void write_outputs(const RunOutput& out);

// Full command-line entry point; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace bergman::cli
