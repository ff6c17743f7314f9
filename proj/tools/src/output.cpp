#include "heavytail_cli/output.hpp"

#include <cmath>
#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include "heavytail/errors.hpp"

namespace heavytail::cli {

std::string format_double(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::string Table::render() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

void StagedFiles::add(std::filesystem::path path, std::string content) {
  files_.emplace_back(std::move(path), std::move(content));
}

std::vector<std::filesystem::path> StagedFiles::commit() {
  std::vector<std::filesystem::path> temps;
  auto cleanup = [&temps] {
    std::error_code ec;
    for (const auto& t : temps) std::filesystem::remove(t, ec);
  };
  for (const auto& [path, content] : files_) {
    auto temp = path;
    temp += ".tmp";
    temps.push_back(temp);
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      fail(ErrorKind::kResource, "cannot write " + temp.string());
    }
  }
  std::vector<std::filesystem::path> written;
  for (std::size_t i = 0; i < files_.size(); ++i) {
    std::error_code ec;
    std::filesystem::rename(temps[i], files_[i].first, ec);
    if (ec) {
      cleanup();
      fail(ErrorKind::kResource, "cannot move output into " + files_[i].first.string());
    }
    written.push_back(files_[i].first);
  }
  return written;
}

}  // namespace heavytail::cli
