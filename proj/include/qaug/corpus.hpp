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

#ifndef QAUG_CORPUS_HPP_
#define QAUG_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaug/error.hpp"

namespace qaug::corpus {

enum class Split { kTrain, kValid, kTest };
enum class Origin { kNatural, kDistorted, kSynthetic };

std::string_view to_string(Split s);
std::string_view to_string(Origin o);
Split parse_split(std::string_view s);
Origin parse_origin(std::string_view s);

// Upper bound on segment length after preprocessing.
inline constexpr std::int64_t kMaxSegmentMs = 30000;

struct UtteranceRecord {
  std::string id;
  std::string audio_path;
  std::int64_t duration_ms = 0;  // exact; duration_s is derived
  std::string text;
  std::string speaker;
  std::string dialect;
  Split split = Split::kTrain;
  Origin origin = Origin::kNatural;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();  // unknown keys

  double duration_s() const { return static_cast<double>(duration_ms) / 1000.0; }
};

struct Manifest {
  std::vector<UtteranceRecord> records;
  std::string source_note;

  std::int64_t total_ms() const;
  std::int64_t split_ms(Split s) const;
  std::size_t count(Split s) const;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(std::string id)
      : Error("duplicate utterance id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class MissingField : public Error {
 public:
  MissingField(std::size_t line, std::string name)
      : Error("line " + std::to_string(line) + ": missing field '" + name + "'"),
        name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class BadRatios : public InvalidArgument {
 public:
  explicit BadRatios(const std::string& cause) : InvalidArgument("bad split ratios: " + cause) {}
};

struct LoadOptions {
  // Reject records longer than kMaxSegmentMs. Off for raw, unsegmented input.
  bool enforce_max_duration = true;
};

// JSONL, one UtteranceRecord per line. Blank lines are ignored.
Manifest load_manifest(const std::filesystem::path& path, LoadOptions opts = {});
Manifest parse_manifest(std::string_view jsonl, std::string_view source = "<memory>",
                        LoadOptions opts = {});
std::string to_jsonl(const Manifest& m);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

nlohmann::ordered_json to_json(const UtteranceRecord& r);

// Seeded shuffle, then greedy assignment by cumulative duration: a record goes
// to train while the duration already assigned is below ratios[0] * total,
// then to valid below (ratios[0] + ratios[1]) * total, then to test.
Manifest split_corpus(const Manifest& m, std::array<double, 3> ratios, std::uint64_t seed);

struct Segment {
  double start_s;
  double end_s;
};

// Contiguous cover of [0, duration]; all pieces but the last are max_s long.
std::vector<Segment> segment_plan(double duration_s, double max_s = 30.0);
std::vector<std::pair<std::int64_t, std::int64_t>> segment_plan_ms(std::int64_t duration_ms,
                                                                  std::int64_t max_ms);

std::int64_t seconds_to_ms(double s);

}  // namespace qaug::corpus

#endif  // QAUG_CORPUS_HPP_
