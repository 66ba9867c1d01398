#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "smallball/io.hpp"

namespace smallball::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return HUGE_VAL;
  if (text == "-inf") return -HUGE_VAL;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw std::invalid_argument("not a number: '" + text + "'");
  return value;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string join_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line;
}

// Splits one logical record starting at `pos`; quoted fields may span lines.
std::vector<std::string> split_record(const std::string& text, std::size_t& pos) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          cur += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw std::invalid_argument("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path, const Metadata& metadata, const std::vector<std::string>& header)
    : out_(&std::cout), columns_(header.size()) {
  if (!path.empty() && path != "-") {
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    out_ = file_.get();
  }
  for (const auto& [key, value] : metadata) *out_ << "# " << key << '=' << value << '\n';
  *out_ << join_row(header) << '\n';
  out_->flush();
  if (!*out_) throw std::runtime_error("write failed for '" + path + "'");
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw std::invalid_argument("CSV row has the wrong number of fields");
  *out_ << join_row(fields) << '\n';
  out_->flush();
  if (!*out_) throw std::runtime_error("CSV write failed");
}

void emit_results(const std::string& path, const Metadata& metadata, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  CsvWriter w(path, metadata, header);
  for (const auto& r : rows) w.write_row(r);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    if (!have_header && text[pos] == '#') {
      const std::size_t end = text.find('\n', pos);
      std::string line = text.substr(pos + 1, end == std::string::npos ? std::string::npos : end - pos - 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line.front() == ' ') line.erase(0, 1);
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) t.metadata.emplace_back(line, "");
      else t.metadata.emplace_back(line.substr(0, eq), line.substr(eq + 1));
      pos = end == std::string::npos ? text.size() : end + 1;
      continue;
    }
    std::vector<std::string> rec = split_record(text, pos);
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (!have_header) {
      t.header = std::move(rec);
      have_header = true;
    } else {
      if (rec.size() != t.header.size()) throw std::invalid_argument("CSV row width differs from the header");
      t.rows.push_back(std::move(rec));
    }
  }
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      row.push_back(parse_double(b == std::string::npos ? "" : cell.substr(b, e - b + 1)));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::invalid_argument("'" + path + "': rows have different lengths");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace smallball::io
