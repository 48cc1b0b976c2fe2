#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace clusterfeat {

// Shortest decimal string that parses back to exactly x.  Used everywhere a
// double lands in a CSV or log so that reruns are byte-identical.
std::string format_double(double x);

// CSV with a header row, '.' decimal separator, comma delimiter.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  const std::string& str() const { return buf_; }
  void write(const std::filesystem::path& path) const;

 private:
  std::size_t width_;
  std::string buf_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Reads a whole CSV file; cells are kept as raw strings, quoting is not
// supported (none of our formats need it).
CsvTable read_csv(const std::filesystem::path& path);

// FNV-1a over the canonical (sorted-key) JSON dump; names run directories.
std::string config_hash(const nlohmann::json& config);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Throws std::invalid_argument naming the offending key if `config` contains
// any key not listed in `allowed`.  Keeps typos from silently doing nothing.
void reject_unknown_keys(const nlohmann::json& config,
                         const std::vector<std::string>& allowed,
                         const std::string& where);

}  // namespace clusterfeat
