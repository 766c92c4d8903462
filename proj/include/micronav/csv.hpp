#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace micronav {

// RFC 4180 style reader: quoted fields, embedded commas and newlines, doubled
// quotes, CRLF line ends, UTF-8 BOM on the first record. Blank lines are
// skipped; a line of bare commas still yields a record of empty fields.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // One record, or nullopt at end of input.
  std::optional<std::vector<std::string>> next();

  // 1-based line number where the most recent record started.
  std::size_t record_line() const { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  bool first_record_ = true;
};

std::string csv_escape(const std::string& field);
std::string csv_join(const std::vector<std::string>& fields);

std::optional<std::size_t> find_column(const std::vector<std::string>& header,
                                       const std::string& name);

}  // namespace micronav
