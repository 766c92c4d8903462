#include "micronav/csv.hpp"

#include <algorithm>

namespace micronav {

namespace {

void strip_bom(std::string& s) {
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF &&
      static_cast<unsigned char>(s[1]) == 0xBB &&
      static_cast<unsigned char>(s[2]) == 0xBF) {
    s.erase(0, 3);
  }
}

}  // namespace

std::optional<std::vector<std::string>> CsvReader::next() {
  while (true) {
    int first = in_.peek();
    if (first == std::istream::traits_type::eof()) return std::nullopt;

    record_line_ = line_;
    std::vector<std::string> fields;
    std::string cell;
    bool in_quotes = false;
    bool saw_any = false;
    bool multi_field = false;

    int ci;
    while ((ci = in_.get()) != std::istream::traits_type::eof()) {
      const char c = static_cast<char>(ci);
      if (c == '\n') line_++;
      if (in_quotes) {
        if (c == '"') {
          if (in_.peek() == '"') {
            cell += '"';
            in_.get();
          } else {
            in_quotes = false;
          }
        } else {
          cell += c;
          saw_any = true;
        }
        continue;
      }
      if (c == '"') {
        in_quotes = true;
        saw_any = true;
      } else if (c == ',') {
        fields.push_back(std::move(cell));
        cell.clear();
        multi_field = true;
      } else if (c == '\r') {
        // swallow; the matching \n terminates the record
      } else if (c == '\n') {
        break;
      } else {
        cell += c;
        saw_any = true;
      }
    }
    fields.push_back(std::move(cell));

    if (!multi_field && !saw_any) continue;  // blank line

    if (first_record_) {
      first_record_ = false;
      if (!fields.empty()) strip_bom(fields.front());
    }
    return fields;
  }
}

std::string csv_escape(const std::string& field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  return out;
}

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace micronav
