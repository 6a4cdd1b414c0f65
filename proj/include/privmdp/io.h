// Copyright 2026 The privmdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVMDP_IO_H_
#define PRIVMDP_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace privmdp {

// Shortest round-trip decimal form.
std::string FormatDouble(double v);

// Writes are byte-deterministic: fixed key order, "\n" line endings.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);
void WriteJsonFile(const std::filesystem::path& path,
                   const nlohmann::ordered_json& j);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);

// Minimal CSV builder.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(unsigned long long v);
  CsvWriter& cell(unsigned long v) { return cell(static_cast<unsigned long long>(v)); }
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  void end_row();

  const std::string& str() const { return text_; }
  void save(const std::filesystem::path& path) const { WriteTextFile(path, text_); }

 private:
  void separator();

  std::string text_;
  bool row_open_ = false;
};

}  // namespace privmdp

#endif  // PRIVMDP_IO_H_
