#pragma once

#include <string>
#include <vector>

namespace isirate {

// Six significant digits, as used in every CSV export.
std::string fmt6(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row_numbers(const std::vector<double>& values);
  std::string str() const { return out_; }
  void save(const std::string& path) const { write_text_file(path, out_); }

 private:
  std::size_t width_;
  std::string out_;
};

// "<path minus extension>.meta.json"
std::string sidecar_path(const std::string& csv_path);

}  // namespace isirate
