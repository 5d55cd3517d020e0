// Copyright 2026 The Chainsim Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "chainsim/sim_engine.hpp"

namespace chainsim {

inline constexpr const char* kTraceHeader =
    "t,cost,avg_cost,backlog,policy,epsilon,seed";

// One file per run; floats at 9 significant digits.
inline void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << kTraceHeader << "\n";
  for (const TraceRow& row : trace.rows) {
    os << row.t << ',' << format_g9(row.cost) << ',' << format_g9(row.avg_cost)
       << ',' << format_g9(row.backlog) << ',' << policy_name(trace.policy)
       << ',' << format_g9(trace.epsilon) << ',' << trace.seed << "\n";
  }
}

inline void write_trace_csv_file(const std::string& path, const Trace& trace) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_trace_csv(os, trace);
}

struct ParsedTraceRow {
  long t = 0;
  double cost = 0.0;
  double avg_cost = 0.0;
  double backlog = 0.0;
  std::string policy;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<ParsedTraceRow> parse_trace_csv(std::istream& is) {
  std::vector<ParsedTraceRow> rows;
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("trace csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader)
    throw std::runtime_error("trace csv: unexpected header: " + line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 7)
      throw std::runtime_error("trace csv: bad field count: " + line);
    ParsedTraceRow r;
    r.t = std::stol(f[0]);
    r.cost = std::stod(f[1]);
    r.avg_cost = std::stod(f[2]);
    r.backlog = std::stod(f[3]);
    r.policy = f[4];
    r.epsilon = std::stod(f[5]);
    r.seed = std::stoull(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string serialize_trace_rows(const std::vector<ParsedTraceRow>& rows) {
  std::ostringstream os;
  os << kTraceHeader << "\n";
  for (const ParsedTraceRow& r : rows)
    os << r.t << ',' << format_g9(r.cost) << ',' << format_g9(r.avg_cost) << ','
       << format_g9(r.backlog) << ',' << r.policy << ',' << format_g9(r.epsilon)
       << ',' << r.seed << "\n";
  return os.str();
}

// Generic small-table writer for sweep summaries.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size())
      throw std::logic_error("csv table: cell count mismatch");
    rows_.push_back(std::move(cells));
  }

  void write(std::ostream& os) const {
    write_line(os, header_);
    for (const auto& r : rows_) write_line(os, r);
  }

  void write_file(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    write(os);
  }

 private:
  static void write_line(std::ostream& os, const std::vector<std::string>& cs) {
    for (std::size_t j = 0; j < cs.size(); ++j) {
      if (j) os << ',';
      os << cs[j];
    }
    os << "\n";
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace chainsim
