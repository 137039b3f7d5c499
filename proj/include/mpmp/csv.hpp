// SPDX-License-Identifier: Apache-2.0
//
// mpmp: moving-port channel prediction for fluid-antenna receivers
// Copyright (C) 2026 The mpmp authors
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

#ifndef MPMP_CSV_HPP
#define MPMP_CSV_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace mpmp
{
    using CsvValue = std::variant<std::int64_t, double, std::string>;

    struct CsvTable
    {
        std::vector<std::string> comments; // written as "# <text>" before the header
        std::vector<std::string> header;
        std::vector<std::vector<CsvValue>> rows;
    };

    // Doubles use %.17g so a parse returns the identical value.
    std::string format_value(const CsvValue &v);
    std::string quote_field(const std::string &field);

    void write_csv(std::ostream &out, const CsvTable &table);
    // Throws std::runtime_error when the file cannot be written.
    void write_csv_file(const std::string &path, const CsvTable &table);

    // Parsed fields stay strings; comment lines are collected separately.
    struct ParsedCsv
    {
        std::vector<std::string> comments;
        std::vector<std::string> header;
        std::vector<std::vector<std::string>> rows;
        int column(const std::string &name) const; // -1 when absent
    };
    ParsedCsv parse_csv(const std::string &text);
    ParsedCsv read_csv_file(const std::string &path);
}

#endif
