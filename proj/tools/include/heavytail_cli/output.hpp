#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace heavytail::cli {

/// Shortest round-trip form of x ("%.17g"); empty for NaN.
std::string format_double(double x);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string render() const;
};

/// Long-format rows (series, x, quantity, value) for external plotting.
struct PlotData {
  Table table{{"series", "x", "quantity", "value"}, {}};

  void add(const std::string& series, const std::string& x,
           const std::string& quantity, double value) {
    table.add({series, x, quantity, format_double(value)});
  }
};

/// Files written all-or-nothing: each goes to a temporary sibling first and
/// is renamed into place only once every file was written successfully.
class StagedFiles {
 public:
  void add(std::filesystem::path path, std::string content);
  std::vector<std::filesystem::path> commit();

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

}  // namespace heavytail::cli
