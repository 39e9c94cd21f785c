#include "rulepref/csv.hpp"

#include <ostream>

#include "rulepref/error.hpp"

namespace rulepref::csv {

std::vector<LineRecord> read_records(std::istream& in) {
  std::vector<LineRecord> records;
  LineRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool record_open = false;
  std::size_t line = 1;
  std::size_t quote_line = 0;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(current));
    current = LineRecord{};
    record_open = false;
  };

  char ch;
  while (in.get(ch)) {
    if (!record_open) {
      current.line = line;
      record_open = true;
    }
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          quote_line = line;
          field_started = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() != '\n') field.push_back(ch);
        break;
      case '\n':
        // A blank line carries no record.
        if (current.fields.empty() && field.empty() && !field_started) {
          record_open = false;
        } else {
          end_record();
        }
        ++line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw DataError("malformed CSV row at line " + std::to_string(quote_line) + ": unterminated quote");
  }
  if (record_open && !(current.fields.empty() && field.empty() && !field_started)) end_record();
  return records;
}

std::string escape_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_record(std::ostream& out, const Record& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape_field(fields[i]);
  }
  out << '\n';
}

}  // namespace rulepref::csv
