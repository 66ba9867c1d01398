#pragma once

#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace smallball::io {

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double(double x);
double parse_double(const std::string& text);

/// RFC 4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(const std::string& text);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Writes `# key=value` lines, a header row, then rows as they arrive. Each
/// row is flushed so partial results survive an interrupted run.
class CsvWriter {
 public:
  /// path "-" or "" writes to stdout. Throws std::runtime_error if the file
  /// cannot be opened.
  CsvWriter(const std::string& path, const Metadata& metadata, const std::vector<std::string>& header);

  void write_row(const std::vector<std::string>& fields);
  std::size_t columns() const { return columns_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
  std::size_t columns_;
};

void emit_results(const std::string& path, const Metadata& metadata, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows);

struct CsvTable {
  Metadata metadata;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv(const std::string& path);

/// Dense numeric matrix from a CSV file without header (lines starting with
/// '#' are skipped).
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

}  // namespace smallball::io
