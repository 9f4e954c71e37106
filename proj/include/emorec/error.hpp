// Copyright 2026 The emorec Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace emorec {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed files, inconsistent shapes, invalid configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Runtime numeric failure (non-finite loss or gradient) or a corrupt
// binary artifact such as a truncated checkpoint.
class NumericError : public Error {
 public:
  using Error::Error;
};

class CorruptFileError : public NumericError {
 public:
  using NumericError::NumericError;
};

void log_warning(const std::string& message);
void log_info(const std::string& message);

}  // namespace emorec
