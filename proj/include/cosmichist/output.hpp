#pragma once

// Run-directory artifacts: fixed-format CSV tables, a minimal SVG line chart,
// SHA-256 digests and the line-oriented run manifest.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cosmichist {

class IoError : public std::runtime_error {
public:
  IoError(std::filesystem::path path, const std::string& what)
      : std::runtime_error(what + ": " + path.string()), path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

//! printf("%.10e").
std::string format_sci(double value);

//! Comma separated, '\n' line ends, every data cell formatted with format_sci.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& row);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string render() const;

private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

//! Single-series SVG 1.1 line chart with axes, ticks and labels.
struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<double> xs;
  std::vector<double> ys;

  std::string render_svg(int width = 720, int height = 480) const;
};

std::string sha256_hex(std::string_view data);
//! Throws IoError if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// In-memory set of files that is written to a directory as a unit: if any
/// write fails, the files already written by this commit are removed.
class OutputSet {
public:
  void add(std::string name, std::string content);
  const std::vector<std::pair<std::string, std::string>>& files() const noexcept { return files_; }

  //! Writes every file under dir (created if needed); returns the paths.
  std::vector<std::filesystem::path> commit(const std::filesystem::path& dir) const;

private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct ManifestRecord {
  std::string command;
  std::string version;
  std::vector<std::pair<std::string, std::string>> config;
  //! (file name, "sha256:<hex>")
  std::vector<std::pair<std::string, std::string>> digests;
  double wall_clock_seconds = 0.0;

  std::string render() const;
};

/// Re-hashes every `file.<name>` entry of a manifest against the files next to
/// it. Returns one message per missing or mismatching file; empty when intact.
std::vector<std::string> verify_manifest(const std::filesystem::path& manifest);

} // namespace cosmichist
