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

#ifndef DPAUDIT_VERSION_H_
#define DPAUDIT_VERSION_H_

namespace dpaudit {

inline constexpr const char* kToolVersion = "0.1.0";

// Version of the on-disk transcript JSON layout.
inline constexpr int kTranscriptVersion = 1;

// Version of the audit report JSON layout.
inline constexpr int kReportVersion = 1;

// Version of cached v_k tables; bump when the numerical pipeline changes
// in a way that invalidates previously cached values.
inline constexpr int kVkCacheVersion = 1;

}  // namespace dpaudit

#endif  // DPAUDIT_VERSION_H_
