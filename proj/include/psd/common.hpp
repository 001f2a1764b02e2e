//  Copyright 2026 The PSD Toolkit Authors. All Rights Reserved.
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#ifndef PSD_COMMON_HPP_
#define PSD_COMMON_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace psd {

using Vec = std::vector<double>;
using VecView = std::span<const double>;

// Bad input data: malformed files, inconsistent dimensions, missing tokens.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller violated an operation's precondition (bad parameter value).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double dot(VecView a, VecView b);
double norm(VecView a);
// Unit vector along a; zero vector stays zero.
Vec normalized(VecView a);

std::vector<std::string> split(std::string_view s, char delim);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string vec_to_csv(VecView v);
Vec vec_from_csv(std::string_view s);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Callers write results
// into preallocated slots so output order never depends on scheduling.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace psd

#endif  // PSD_COMMON_HPP_
