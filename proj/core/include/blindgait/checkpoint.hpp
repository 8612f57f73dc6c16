// Copyright 2026 The Blindgait Authors
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

#ifndef BLINDGAIT_CHECKPOINT_HPP_
#define BLINDGAIT_CHECKPOINT_HPP_

#include <string>

#include "blindgait/networks.hpp"

namespace blindgait {

/// Versioned binary parameter container: magic string, a hash of the
/// architecture metadata, then named little-endian float64 blocks. A JSON
/// sidecar (`<path>.json`) carries the human-readable architecture metadata.
namespace checkpoint {

inline constexpr char kMagic[8] = {'B', 'G', 'C', 'K', '0', '0', '0', '1'};

uint64_t metadata_hash(const std::string& metadata_json);

void save(const std::string& path, const ParamSet& params,
          const std::string& metadata_json);

/// Loads parameter blocks by name into an existing ParamSet (shapes must
/// match) and returns the sidecar metadata. Throws on magic/hash mismatch.
std::string load(const std::string& path, ParamSet* params);

/// Reads only the sidecar metadata.
std::string read_metadata(const std::string& path);

}  // namespace checkpoint

}  // namespace blindgait

#endif  // BLINDGAIT_CHECKPOINT_HPP_
