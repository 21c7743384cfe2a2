#include "photostat/cli/result_table.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "photostat/error.hpp"

namespace photostat::cli {

namespace {

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

Cell parse_cell(const std::string& s) {
  if (s.empty()) return s;
  char* end = nullptr;
  if (s.find_first_of(".eEnN") == std::string::npos) {
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end && *end == '\0') return static_cast<std::int64_t>(v);
  }
  const double d = std::strtod(s.c_str(), &end);
  if (end && *end == '\0' && std::isfinite(d)) return d;
  return s;
}

Json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return kUndefined;
    return *d;
  }
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

}  // namespace

void ResultTable::add_column(std::string name, std::vector<Cell> cells) {
  if (!columns_.empty() && cells.size() != rows()) {
    throw std::logic_error("column '" + name + "' has " + std::to_string(cells.size()) +
                           " cells, table has " + std::to_string(rows()) + " rows");
  }
  columns_.push_back({std::move(name), std::move(cells)});
}

const Column& ResultTable::column(const std::string& name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no column '" + name + "'");
}

std::string format_cell(const Cell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) return kUndefined;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return quote_if_needed(std::get<std::string>(cell));
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  std::istringstream meta(metadata.dump(2));
  for (std::string line; std::getline(meta, line);) os << "# " << line << '\n';
  for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << quote_if_needed(columns_[c].name);
  os << '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << format_cell(columns_[c].cells[r]);
    os << '\n';
  }
  return os.str();
}

std::string ResultTable::to_json() const {
  Json doc;
  doc["metadata"] = metadata;
  Json cols = Json::object();
  for (const auto& c : columns_) {
    Json arr = Json::array();
    for (const auto& cell : c.cells) arr.push_back(cell_json(cell));
    cols[c.name] = std::move(arr);
  }
  doc["columns"] = std::move(cols);
  return doc.dump(2) + "\n";
}

ResultTable parse_csv_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string block;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      block += line.size() >= 2 && line[1] == ' ' ? line.substr(2) : line.substr(1);
      block += '\n';
      continue;
    }
    header = split_csv_line(line);
    break;
  }
  std::vector<std::vector<Cell>> cells(header.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) throw InvalidArgument("ragged CSV row: " + line);
    for (std::size_t c = 0; c < fields.size(); ++c) cells[c].push_back(parse_cell(fields[c]));
  }
  ResultTable t;
  if (!block.empty()) {
    try {
      t.metadata = Json::parse(block);
    } catch (const Json::parse_error& e) {
      throw InvalidArgument(std::string("metadata block is not valid JSON: ") + e.what());
    }
  }
  for (std::size_t c = 0; c < header.size(); ++c) t.add_column(header[c], std::move(cells[c]));
  return t;
}

}  // namespace photostat::cli
