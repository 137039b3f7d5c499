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

#include "mpmp/csv.hpp"
#include "mpmp/common.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mpmp
{
    std::string format_value(const CsvValue &v)
    {
        if (const auto *i = std::get_if<std::int64_t>(&v))
            return std::to_string(*i);
        if (const auto *d = std::get_if<double>(&v))
        {
            if (std::isnan(*d))
                return "nan";
            if (std::isinf(*d))
                return *d > 0 ? "inf" : "-inf";
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", *d);
            return buf;
        }
        return quote_field(std::get<std::string>(v));
    }

    std::string quote_field(const std::string &field)
    {
        if (field.find_first_of(",\"\r\n") == std::string::npos)
            return field;
        std::string out = "\"";
        for (char c : field)
        {
            if (c == '"')
                out += '"';
            out += c;
        }
        out += '"';
        return out;
    }

    void write_csv(std::ostream &out, const CsvTable &table)
    {
        for (const auto &c : table.comments)
            out << "# " << c << '\n';
        for (std::size_t i = 0; i < table.header.size(); ++i)
            out << (i ? "," : "") << quote_field(table.header[i]);
        out << '\n';
        for (const auto &row : table.rows)
        {
            if (row.size() != table.header.size())
                throw std::logic_error("csv row width does not match header");
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << format_value(row[i]);
            out << '\n';
        }
    }

    void write_csv_file(const std::string &path, const CsvTable &table)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open '" + path + "' for writing");
        write_csv(out, table);
        out.flush();
        if (!out)
            throw std::runtime_error("failed writing '" + path + "'");
    }

    int ParsedCsv::column(const std::string &name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return static_cast<int>(i);
        return -1;
    }

    ParsedCsv parse_csv(const std::string &text)
    {
        ParsedCsv out;
        std::vector<std::vector<std::string>> records;
        std::vector<std::string> record;
        std::string field;
        bool in_quotes = false, at_line_start = true, field_started = false;
        std::size_t i = 0;
        const std::size_t n = text.size();
        auto end_record = [&]
        {
            record.push_back(field);
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            at_line_start = true;
            field_started = false;
        };
        while (i < n)
        {
            const char c = text[i];
            if (in_quotes)
            {
                if (c == '"')
                {
                    if (i + 1 < n && text[i + 1] == '"')
                    {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    in_quotes = false;
                }
                else
                    field += c;
                ++i;
                continue;
            }
            if (at_line_start && c == '#')
            {
                const std::size_t eol = text.find('\n', i);
                std::string line = text.substr(i + 1, eol == std::string::npos ? std::string::npos : eol - i - 1);
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                if (!line.empty() && line.front() == ' ')
                    line.erase(0, 1);
                out.comments.push_back(line);
                i = eol == std::string::npos ? n : eol + 1;
                continue;
            }
            at_line_start = false;
            if (c == '"' && !field_started)
            {
                in_quotes = true;
                field_started = true;
            }
            else if (c == ',')
            {
                record.push_back(field);
                field.clear();
                field_started = false;
            }
            else if (c == '\n')
                end_record();
            else if (c == '\r')
            {
                if (i + 1 < n && text[i + 1] == '\n')
                    ++i;
                end_record();
            }
            else
            {
                field += c;
                field_started = true;
            }
            ++i;
        }
        if (in_quotes)
            throw ConfigError("unterminated quoted csv field");
        if (!at_line_start)
            end_record();
        if (records.empty())
            return out;
        out.header = records.front();
        for (std::size_t r = 1; r < records.size(); ++r)
        {
            if (records[r].size() != out.header.size())
                throw ConfigError("csv row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                  " fields, header has " + std::to_string(out.header.size()));
            out.rows.push_back(std::move(records[r]));
        }
        return out;
    }

    ParsedCsv read_csv_file(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw ConfigError("cannot open '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_csv(buf.str());
    }
}
