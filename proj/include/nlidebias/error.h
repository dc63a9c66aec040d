// Copyright 2026 The nlidebias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NLIDEBIAS_ERROR_H_
#define NLIDEBIAS_ERROR_H_

#include <stdexcept>
#include <string>

namespace nlidebias {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input files, malformed records, or invalid arguments. The CLI maps
// these to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// A dataset or contrast set violates a structural invariant. Exit code 3.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlidebias

#endif  // NLIDEBIAS_ERROR_H_
