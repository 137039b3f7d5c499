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

#ifndef MPMP_CONFIG_HPP
#define MPMP_CONFIG_HPP

#include "mpmp/linksim.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace mpmp
{
    using Json = nlohmann::json;

    // Default configuration document. Every accepted key appears here.
    Json default_config();

    // Applies "dotted.key=value" to a document. The value is parsed as JSON
    // and taken as a plain string when that fails.
    void apply_override(Json &doc, const std::string &assignment);

    // Defaults, then the file (if path is nonempty), then the overrides.
    // Unknown keys and type mismatches throw ConfigError naming the key.
    Json load_config(const std::string &path, const std::vector<std::string> &overrides);

    // Fills derived fields (fa.m / fa.rho) in place and returns the scenario.
    SimScenario scenario_from_json(Json &doc);

    struct RunConfig
    {
        Json doc;            // fully resolved document
        SimScenario scenario;
        std::uint64_t seed = 1;
    };

    RunConfig parse_config(const std::string &path, const std::vector<std::string> &overrides);

    // Stable compact serialization used for hashing and CSV headers.
    std::string compact(const Json &doc);
    std::uint64_t config_hash(const Json &doc);
}

#endif
