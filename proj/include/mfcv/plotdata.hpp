// Copyright 2026 The mfcv Authors
//
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

// Trace CSV reading and per-channel plot files.
//
// A channel file has the columns t,value,reference when the channel has a
// reference (tracked signals and errors) and t,value otherwise.

#ifndef MFCV_PLOTDATA_HPP_
#define MFCV_PLOTDATA_HPP_

#include "mfcv/error.hpp"
#include "mfcv/numfmt.hpp"

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace mfcv
{

/// Column-major numeric table read from a trace CSV.
struct TraceTable
{
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[column][row]

  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
  std::optional<std::size_t> find(const std::string & name) const
  {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) {
        return i;
      }
    }
    return std::nullopt;
  }
  const std::vector<double> & column(const std::string & name) const
  {
    const auto i = find(name);
    if (!i) {
      throw InvalidParameterError("trace has no column '" + name + "'");
    }
    return data[*i];
  }
};

namespace detail
{

inline std::vector<std::string_view> split_csv_line(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) {
      return out;
    }
    start = comma + 1;
  }
}

inline double parse_double(std::string_view text, std::size_t row, const std::string & column)
{
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InvalidParameterError(
      "trace row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace detail

inline TraceTable parse_trace_csv(const std::string & text)
{
  TraceTable t;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw InvalidParameterError("trace CSV has no header row");
  }
  for (auto c : detail::split_csv_line(line)) {
    t.columns.emplace_back(c);
  }
  t.data.resize(t.columns.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != t.columns.size()) {
      throw InvalidParameterError(
        "trace row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " fields, expected " +
        std::to_string(t.columns.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      t.data[i].push_back(detail::parse_double(cells[i], row, t.columns[i]));
    }
  }
  return t;
}

/// Reference column of each tracked channel; errors reference zero.
inline const std::map<std::string, std::string> & channel_references()
{
  static const std::map<std::string, std::string> refs = {
    {"Vx", "Vx_ref"}, {"psi", "psi_ref"}, {"z2", "z2_ref"}, {"Y", "y_path"}};
  return refs;
}

/// Every column except time is a channel.
inline std::vector<std::string> available_channels(const TraceTable & t)
{
  std::vector<std::string> out;
  for (const auto & c : t.columns) {
    if (c != "t") {
      out.push_back(c);
    }
  }
  return out;
}

/// Validates the requested channels; an empty request selects all of them.
inline std::vector<std::string> select_channels(const TraceTable & t, const std::vector<std::string> & requested)
{
  const std::vector<std::string> all = available_channels(t);
  if (requested.empty()) {
    return all;
  }
  for (const auto & r : requested) {
    if (r == "t" || !t.find(r)) {
      std::string list;
      for (const auto & c : all) {
        list += (list.empty() ? "" : ", ") + c;
      }
      throw InvalidParameterError("unknown channel '" + r + "'; available channels: " + list);
    }
  }
  return requested;
}

/// Plot file for one channel, values printed round-trip exact.
inline std::string channel_csv(const TraceTable & t, const std::string & channel)
{
  const auto & time = t.column("t");
  const auto & value = t.column(channel);
  const std::vector<double> * ref = nullptr;
  const bool is_error = channel.rfind("e_", 0) == 0;
  if (const auto it = channel_references().find(channel); it != channel_references().end() && t.find(it->second)) {
    ref = &t.column(it->second);
  }
  std::ostringstream os;
  os << ((ref || is_error) ? "t,value,reference\n" : "t,value\n");
  for (std::size_t i = 0; i < time.size(); ++i) {
    os << exact(time[i]) << ',' << exact(value[i]);
    if (ref) {
      os << ',' << exact((*ref)[i]);
    } else if (is_error) {
      os << ",0";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace mfcv

#endif  // MFCV_PLOTDATA_HPP_
