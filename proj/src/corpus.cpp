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

#include "qaug/corpus.hpp"

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "qaug/random.hpp"
#include "qaug/text_io.hpp"

namespace qaug::corpus {

using json = nlohmann::ordered_json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::kNatural: return "natural";
    case Origin::kDistorted: return "distorted";
    case Origin::kSynthetic: return "synthetic";
  }
  return "natural";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "valid") return Split::kValid;
  if (s == "test") return Split::kTest;
  throw InvalidArgument("unknown split '" + std::string(s) + "'");
}

Origin parse_origin(std::string_view s) {
  if (s == "natural") return Origin::kNatural;
  if (s == "distorted") return Origin::kDistorted;
  if (s == "synthetic") return Origin::kSynthetic;
  throw InvalidArgument("unknown origin '" + std::string(s) + "'");
}

std::int64_t seconds_to_ms(double s) { return std::llround(s * 1000.0); }

std::int64_t Manifest::total_ms() const {
  std::int64_t t = 0;
  for (const auto& r : records) t += r.duration_ms;
  return t;
}

std::int64_t Manifest::split_ms(Split s) const {
  std::int64_t t = 0;
  for (const auto& r : records)
    if (r.split == s) t += r.duration_ms;
  return t;
}

std::size_t Manifest::count(Split s) const {
  std::size_t n = 0;
  for (const auto& r : records) n += r.split == s;
  return n;
}

namespace {

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw MissingField(line, key);
  return *it;
}

std::string optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return it->get<std::string>();
}

constexpr const char* kKnownKeys[] = {"id", "audio", "duration_s", "text", "speaker",
                                      "dialect", "split", "origin"};

UtteranceRecord parse_record(const json& obj, std::string_view source, std::size_t line,
                             const LoadOptions& opts) {
  if (!obj.is_object()) throw ParseError(std::string(source), line, "record is not a JSON object");
  UtteranceRecord r;
  try {
    r.id = require(obj, "id", line).get<std::string>();
    r.audio_path = require(obj, "audio", line).get<std::string>();
    double dur = require(obj, "duration_s", line).get<double>();
    r.text = require(obj, "text", line).get<std::string>();
    if (!std::isfinite(dur) || dur < 0)
      throw ParseError(std::string(source), line, "duration_s must be >= 0");
    r.duration_ms = seconds_to_ms(dur);
    r.speaker = optional_string(obj, "speaker");
    r.dialect = optional_string(obj, "dialect");
    if (auto s = optional_string(obj, "split"); !s.empty()) r.split = parse_split(s);
    if (auto o = optional_string(obj, "origin"); !o.empty()) r.origin = parse_origin(o);
  } catch (const json::exception& e) {
    throw ParseError(std::string(source), line, e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string(source), line, e.what());
  }
  if (r.id.empty()) throw ParseError(std::string(source), line, "id is empty");
  if (trim(r.text).empty()) throw ParseError(std::string(source), line, "text is empty");
  if (opts.enforce_max_duration && r.duration_ms > kMaxSegmentMs)
    throw ParseError(std::string(source), line,
                     "duration " + std::to_string(r.duration_s()) + " s exceeds the 30 s segment limit");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || it.key() == k;
    if (!known) r.extra[it.key()] = it.value();
  }
  return r;
}

}  // namespace

Manifest parse_manifest(std::string_view jsonl, std::string_view source, LoadOptions opts) {
  Manifest m;
  m.source_note = std::string(source);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& raw : split(jsonl, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string(source), line_no, e.what());
    }
    auto rec = parse_record(obj, source, line_no, opts);
    if (!seen.insert(rec.id).second) throw DuplicateId(rec.id);
    m.records.push_back(std::move(rec));
  }
  return m;
}

Manifest load_manifest(const std::filesystem::path& path, LoadOptions opts) {
  return parse_manifest(read_file(path), path.string(), opts);
}

json to_json(const UtteranceRecord& r) {
  json j;
  j["id"] = r.id;
  j["audio"] = r.audio_path;
  j["duration_s"] = r.duration_s();
  j["text"] = r.text;
  j["speaker"] = r.speaker;
  j["dialect"] = r.dialect;
  j["split"] = to_string(r.split);
  j["origin"] = to_string(r.origin);
  for (auto it = r.extra.begin(); it != r.extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

std::string to_jsonl(const Manifest& m) {
  std::string out;
  for (const auto& r : m.records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_file(path, to_jsonl(m));
}

Manifest split_corpus(const Manifest& m, std::array<double, 3> ratios, std::uint64_t seed) {
  double sum = 0;
  for (double r : ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw BadRatios("each ratio must lie in [0,1]");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw BadRatios("ratios must sum to 1");

  std::vector<std::size_t> order(m.records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const double total = static_cast<double>(m.total_ms());
  const std::array<Split, 3> splits{Split::kTrain, Split::kValid, Split::kTest};
  const std::array<double, 3> cuts{ratios[0] * total, (ratios[0] + ratios[1]) * total, total};
  // Records that start at or past every cut (zero-length tail records) go to
  // the last split that has a positive share.
  Split tail = Split::kTrain;
  for (std::size_t s = 0; s < 3; ++s)
    if (ratios[s] > 0) tail = splits[s];

  Manifest out = m;
  std::int64_t acc = 0;
  for (std::size_t idx : order) {
    auto& r = out.records[idx];
    const auto a = static_cast<double>(acc);
    r.split = tail;
    for (std::size_t s = 0; s < 3; ++s) {
      if (ratios[s] > 0 && a < cuts[s]) {
        r.split = splits[s];
        break;
      }
    }
    acc += r.duration_ms;
  }
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> segment_plan_ms(std::int64_t duration_ms,
                                                                  std::int64_t max_ms) {
  if (duration_ms < 0) throw InvalidArgument("segment_plan: negative duration");
  if (max_ms <= 0) throw InvalidArgument("segment_plan: max length must be positive");
  std::vector<std::pair<std::int64_t, std::int64_t>> plan;
  for (std::int64_t start = 0; start < duration_ms; start += max_ms)
    plan.emplace_back(start, std::min(start + max_ms, duration_ms));
  return plan;
}

std::vector<Segment> segment_plan(double duration_s, double max_s) {
  if (!(duration_s >= 0)) throw InvalidArgument("segment_plan: negative duration");
  if (!(max_s > 0)) throw InvalidArgument("segment_plan: max length must be positive");
  std::vector<Segment> out;
  for (auto [a, b] : segment_plan_ms(seconds_to_ms(duration_s), std::max<std::int64_t>(1, seconds_to_ms(max_s))))
    out.push_back({static_cast<double>(a) / 1000.0, static_cast<double>(b) / 1000.0});
  return out;
}

}  // namespace qaug::corpus
