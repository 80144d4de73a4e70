// Copyright 2026 The Slicer Authors. All rights reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLICER_JSON_IO_H_
#define SLICER_JSON_IO_H_

#include <string>
#include <string_view>

namespace slicer {

// Throws IoError when the file cannot be opened or read.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double v);

}  // namespace slicer

#endif  // SLICER_JSON_IO_H_
