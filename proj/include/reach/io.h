// Copyright 2026 The residual-reach Authors
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

#ifndef REACH_IO_H_
#define REACH_IO_H_

#include <string>

namespace reach {

// Throws UpstreamMissing when the file cannot be read.
std::string read_text_file(const std::string& path);

// Writes to a temporary sibling, then renames over `path`.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace reach

#endif  // REACH_IO_H_
