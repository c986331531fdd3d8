//
// Copyright 2026 The dpaudit Authors
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

// Audit-game transcripts.
//
// A transcript records one run of the guessing game: n secret bits, the
// adversary's guess and confidence score for every coordinate, and the
// sorted index set of the r guesses that were actually released (the
// top r by score).  The defining release invariant is that every
// released score is >= every discarded score, so "released" really means
// "the r most confident guesses"; Validate() enforces it.
//
// On disk a transcript is a single JSON object
//
//   { "version": 1, "spec": {...}, "truths": "<base64>",
//     "guesses": "<base64>", "scores": [...], "released": [...],
//     "certain": "<base64>" (optional) }
//
// where bit vectors are packed LSB-first into bytes and base64-encoded.
// "certain" marks guesses whose score is a serialized stand-in for an
// infinite likelihood ratio (see the randomized-response simulator);
// it is informational, the audit consumes only n, r, and the error count.

#ifndef DPAUDIT_TRANSCRIPT_H_
#define DPAUDIT_TRANSCRIPT_H_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpaudit/errors.h"

namespace dpaudit {

namespace internal {

inline const char* Base64Alphabet() {
  return "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

inline std::string Base64Encode(const std::vector<std::uint8_t>& bytes) {
  const char* alphabet = Base64Alphabet();
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const std::uint32_t word = (std::uint32_t{bytes[i]} << 16) |
                               (std::uint32_t{bytes[i + 1]} << 8) |
                               std::uint32_t{bytes[i + 2]};
    out.push_back(alphabet[(word >> 18) & 63]);
    out.push_back(alphabet[(word >> 12) & 63]);
    out.push_back(alphabet[(word >> 6) & 63]);
    out.push_back(alphabet[word & 63]);
    i += 3;
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t word = std::uint32_t{bytes[i]} << 16;
    out.push_back(alphabet[(word >> 18) & 63]);
    out.push_back(alphabet[(word >> 12) & 63]);
    out.append("==");
  } else if (rest == 2) {
    const std::uint32_t word =
        (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out.push_back(alphabet[(word >> 18) & 63]);
    out.push_back(alphabet[(word >> 12) & 63]);
    out.push_back(alphabet[(word >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::vector<std::uint8_t> Base64Decode(const std::string& text) {
  std::array<int, 256> lut;
  lut.fill(-1);
  const char* alphabet = Base64Alphabet();
  for (int i = 0; i < 64; ++i) {
    lut[static_cast<unsigned char>(alphabet[i])] = i;
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t word = 0;
  int have = 0;
  for (char c : text) {
    if (c == '=') break;
    const int val = lut[static_cast<unsigned char>(c)];
    if (val < 0) {
      throw InvariantViolation("Base64Decode: invalid character in input");
    }
    word = (word << 6) | static_cast<std::uint32_t>(val);
    have += 6;
    if (have >= 8) {
      have -= 8;
      out.push_back(static_cast<std::uint8_t>((word >> have) & 0xFF));
    }
  }
  return out;
}

// Packs 0/1 values LSB-first into bytes, then base64.
inline std::string PackBits(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) {
      throw InvariantViolation("PackBits: values must be 0 or 1");
    }
    if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return Base64Encode(bytes);
}

inline std::vector<std::uint8_t> UnpackBits(const std::string& text,
                                            std::size_t count) {
  const std::vector<std::uint8_t> bytes = Base64Decode(text);
  if (bytes.size() < (count + 7) / 8) {
    throw InvariantViolation("UnpackBits: bitstring shorter than expected");
  }
  std::vector<std::uint8_t> bits(count);
  for (std::size_t i = 0; i < count; ++i) {
    bits[i] = (bytes[i / 8] >> (i % 8)) & 1u;
  }
  return bits;
}

}  // namespace internal

struct Transcript {
  static constexpr int kFormatVersion = 1;

  nlohmann::json spec;                  // mechanism parameters, echoed
  std::vector<std::uint8_t> truths;     // secret bit per coordinate
  std::vector<std::uint8_t> guesses;    // adversary guess per coordinate
  std::vector<double> scores;           // confidence per coordinate
  std::vector<std::uint8_t> certain;    // optional sentinel-score marks
  std::vector<std::int64_t> released;   // sorted indices of released guesses

  std::int64_t n() const { return static_cast<std::int64_t>(truths.size()); }
  std::int64_t r() const { return static_cast<std::int64_t>(released.size()); }

  // Shape and release-rule checks; throws InvariantViolation on failure.
  void Validate() const {
    const std::size_t count = truths.size();
    if (count == 0) throw InvariantViolation("Transcript: empty truths");
    if (guesses.size() != count || scores.size() != count) {
      throw InvariantViolation("Transcript: field lengths disagree");
    }
    if (!certain.empty() && certain.size() != count) {
      throw InvariantViolation("Transcript: certainty mask length disagrees");
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (truths[i] > 1 || guesses[i] > 1 || (!certain.empty() && certain[i] > 1)) {
        throw InvariantViolation("Transcript: bits must be 0 or 1");
      }
      if (!std::isfinite(scores[i])) {
        throw InvariantViolation("Transcript: scores must be finite");
      }
    }
    if (released.empty() || released.size() > count) {
      throw InvariantViolation("Transcript: released set must have 1..n indices");
    }
    std::vector<bool> is_released(count, false);
    std::int64_t prev = -1;
    for (std::int64_t idx : released) {
      if (idx <= prev || idx < 0 || idx >= static_cast<std::int64_t>(count)) {
        throw InvariantViolation(
            "Transcript: released indices must be sorted, unique, in range");
      }
      prev = idx;
      is_released[static_cast<std::size_t>(idx)] = true;
    }
    // Release rule: every released score dominates every discarded score.
    double released_min = std::numeric_limits<double>::infinity();
    double discarded_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
      if (is_released[i]) {
        released_min = std::min(released_min, scores[i]);
      } else {
        discarded_max = std::max(discarded_max, scores[i]);
      }
    }
    if (released.size() < count && released_min < discarded_max) {
      throw InvariantViolation(
          "Transcript: a discarded score exceeds a released score");
    }
  }

  nlohmann::json ToJson() const {
    nlohmann::json j;
    j["version"] = kFormatVersion;
    j["spec"] = spec;
    j["truths"] = internal::PackBits(truths);
    j["guesses"] = internal::PackBits(guesses);
    j["scores"] = scores;
    j["released"] = released;
    if (!certain.empty()) j["certain"] = internal::PackBits(certain);
    return j;
  }

  static Transcript FromJson(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("version") || !j.contains("scores")) {
      throw InvariantViolation("Transcript: malformed JSON object");
    }
    if (j.at("version").get<int>() != kFormatVersion) {
      throw InvariantViolation("Transcript: unsupported format version");
    }
    Transcript t;
    t.spec = j.value("spec", nlohmann::json::object());
    t.scores = j.at("scores").get<std::vector<double>>();
    const std::size_t count = t.scores.size();
    t.truths = internal::UnpackBits(j.at("truths").get<std::string>(), count);
    t.guesses = internal::UnpackBits(j.at("guesses").get<std::string>(), count);
    if (j.contains("certain")) {
      t.certain = internal::UnpackBits(j.at("certain").get<std::string>(), count);
    }
    t.released = j.at("released").get<std::vector<std::int64_t>>();
    t.Validate();
    return t;
  }
};

}  // namespace dpaudit

#endif  // DPAUDIT_TRANSCRIPT_H_
