//
// Copyright 2026 The qaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef QAUG_ERROR_HPP_
#define QAUG_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace qaug {

// Root of every error the toolkit throws. Stage code catches this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file could not be parsed. line is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& cause)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) +
              ": " + cause),
        source_(std::move(source)),
        line_(line) {}
  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Precondition on an argument violated (bad ratios, out-of-range factor...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// External adapter process could not be started.
class AdapterSpawnError : public Error {
 public:
  using Error::Error;
};

// External adapter spoke something other than the wire protocol.
class ProtocolError : public Error {
 public:
  ProtocolError(std::size_t line, const std::string& cause)
      : Error("protocol error at response line " + std::to_string(line) +
              ": " + cause),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qaug

#endif  // QAUG_ERROR_HPP_
