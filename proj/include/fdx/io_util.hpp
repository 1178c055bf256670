// SPDX-License-Identifier: Apache-2.0
//
// fdxtrack: full-duplex beam tracking for LEO satellite ground terminals
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fdx
{
    /// Writes via a sibling temporary and renames into place. Throws IoError with the path.
    void write_file_atomic(const std::filesystem::path &path, std::string_view contents);

    /// All-or-nothing: if any file fails, none of the targets is created.
    void write_files_atomic(const std::vector<std::pair<std::filesystem::path, std::string>> &files);

    std::string read_file(const std::filesystem::path &path);

    std::vector<std::string> split_csv_line(std::string_view line);
} // namespace fdx
