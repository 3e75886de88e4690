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


// Shortest decimal text that reads back to the same double.

#ifndef MFCV_NUMFMT_HPP_
#define MFCV_NUMFMT_HPP_

#include <charconv>
#include <ostream>
#include <string>

namespace mfcv
{

inline std::string format_double(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Stream manipulator-like wrapper: `os << exact(v)`.
struct exact
{
  double v;
};

inline std::ostream & operator<<(std::ostream & os, exact e) { return os << format_double(e.v); }

}  // namespace mfcv

#endif  // MFCV_NUMFMT_HPP_
