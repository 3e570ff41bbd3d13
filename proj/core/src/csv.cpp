// Copyright (c) 2026 the langloop authors
// SPDX-License-Identifier: Apache-2.0

#include "langloop/csv.hpp"

#include <cstdio>
#include <sstream>

#include "langloop/errors.hpp"
#include "langloop/serialize.hpp"

namespace langloop {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string LabeledMatrix::to_csv() const {
  std::ostringstream out;
  for (const std::string& c : col_labels) {
    out << ',' << c;
  }
  out << '\n';
  for (std::size_t r = 0; r < rows(); ++r) {
    out << row_labels[r];
    for (std::size_t c = 0; c < cols(); ++c) {
      out << ',' << format_double(at(r, c));
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

}  // namespace

LabeledMatrix LabeledMatrix::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  LabeledMatrix m;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (line_no == 1) {
      if (fields.size() < 2) {
        throw ParseError("csv: header needs at least one column", line_no);
      }
      m.col_labels.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != m.cols() + 1) {
      throw ParseError("csv: ragged row (" + std::to_string(fields.size() - 1) +
                           " cells, expected " + std::to_string(m.cols()) +
                           ") on line " + std::to_string(line_no),
                       line_no);
    }
    m.row_labels.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      try {
        std::size_t consumed = 0;
        const double v = std::stod(fields[c], &consumed);
        if (consumed != fields[c].size()) {
          throw std::invalid_argument("trailing garbage");
        }
        m.cells.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("csv: bad number '" + fields[c] + "' on line " +
                             std::to_string(line_no),
                         line_no);
      }
    }
  }
  if (m.rows() == 0) {
    throw ParseError("csv: no data rows", line_no);
  }
  return m;
}

void LabeledMatrix::save(const std::filesystem::path& path) const {
  write_file(path, to_csv());
}

LabeledMatrix LabeledMatrix::load(const std::filesystem::path& path) {
  return from_csv(read_file(path));
}

}  // namespace langloop
