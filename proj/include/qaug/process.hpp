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

#ifndef QAUG_PROCESS_HPP_
#define QAUG_PROCESS_HPP_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <sys/types.h>

namespace qaug {

// Line-oriented conversation with a child process over its stdin/stdout.
// stderr is inherited. Not copyable; one conversation per instance.
class ExternalProcessClient {
 public:
  // argv[0] is looked up on PATH. Throws AdapterSpawnError if it cannot run.
  explicit ExternalProcessClient(std::vector<std::string> argv,
                                 std::chrono::milliseconds read_timeout = std::chrono::seconds(60));
  // Splits a command line on whitespace; single and double quotes group.
  static std::vector<std::string> split_command_line(std::string_view cmd);

  ExternalProcessClient(const ExternalProcessClient&) = delete;
  ExternalProcessClient& operator=(const ExternalProcessClient&) = delete;
  ExternalProcessClient(ExternalProcessClient&& other) noexcept;
  ExternalProcessClient& operator=(ExternalProcessClient&&) = delete;
  ~ExternalProcessClient();

  // Writes line + '\n'. Throws ProtocolError if the child closed its stdin.
  void send_line(std::string_view line);
  // Next line without the newline; nullopt at end of stream. Throws
  // ProtocolError on timeout.
  std::optional<std::string> read_line();
  // Closes the child's stdin and waits. Returns the exit status (128+signal
  // when killed).
  int finish();

  const std::vector<std::string>& argv() const { return argv_; }

 private:
  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  bool eof_ = false;
  std::size_t lines_read_ = 0;
};

}  // namespace qaug

#endif  // QAUG_PROCESS_HPP_
