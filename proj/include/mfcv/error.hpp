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

#ifndef MFCV_ERROR_HPP_
#define MFCV_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mfcv
{

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration value violates its invariant.
class InvalidParameterError : public Error
{
public:
  using Error::Error;
};

/// Division by a vanishing quantity (slip angles at low speed, flat-output
/// denominators, a near-singular decoupling matrix).
class SingularityError : public Error
{
public:
  using Error::Error;
};

class NonFiniteStateError : public Error
{
public:
  using Error::Error;
};

/// An estimator was queried before its sliding window filled up.
class WindowNotFullError : public Error
{
public:
  using Error::Error;
};

class InsufficientSamplesError : public Error
{
public:
  using Error::Error;
};

/// The vehicle left the admissible corridor around the reference path.
class OffCorridorError : public Error
{
public:
  using Error::Error;
};

class ZeroReferenceError : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace mfcv

#endif  // MFCV_ERROR_HPP_
