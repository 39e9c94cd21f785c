#pragma once

#include <istream>
#include <string>
#include <vector>

namespace rulepref::csv {

using Record = std::vector<std::string>;

// Reads comma-separated records with RFC 4180 quoting. Quoted fields may
// contain commas, doubled quotes and line breaks. Records are returned with
// their 1-based starting line number.
struct LineRecord {
  std::size_t line = 0;
  Record fields;
};

std::vector<LineRecord> read_records(std::istream& in);

// Quotes a field only when it contains a comma, quote or line break.
std::string escape_field(const std::string& field);
void write_record(std::ostream& out, const Record& fields);

}  // namespace rulepref::csv
