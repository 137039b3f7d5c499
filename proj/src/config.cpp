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

#include "mpmp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mpmp
{
    Json default_config()
    {
        return Json::parse(R"({
            "seed": 1,
            "carrier_ghz": 39.0,
            "frequency_ghz": null,
            "n_ue": 8,
            "bs": {"n_h": 2, "n_v": 8, "d_h": 0.5, "d_v": 0.5},
            "fa": {"w": 20.0, "m": 300, "rho": null},
            "delay_spread_ns": 616.0,
            "csi_delay_ms": 4.0,
            "slot_ms": 0.5,
            "speeds_kmh": [60.0, 120.0],
            "ricean_k": 1.0,
            "velocity": {"mode": "fa_axis", "direction": [0.0, 0.0, -1.0]},
            "channel": {
                "include_los": true,
                "clusters": [{"n_paths": 36, "power": 1.0}],
                "tau_min_ns": 0.0,
                "path_table": [],
                "cluster_powers": []
            },
            "estimator": {
                "n_s": 128,
                "l": 0,
                "r": 0,
                "delta1": 1,
                "delta2": 0,
                "rank_threshold": 0.001,
                "order_rule": "noise_edge",
                "noise_edge_factor": 1.5,
                "max_order": 0,
                "unit_circle_tol": 0.001,
                "stack_columns": true
            },
            "sim": {
                "snr_db": [0.0, 10.0, 20.0, 30.0],
                "n_drops": 50,
                "n_dl_slots": 8,
                "ul_snr_db": null,
                "selector_params": "estimated",
                "prony_history": 16,
                "prony_order": 0,
                "error_floor_db": -200.0
            },
            "select_port": {"model": "truth", "drop": 0, "ue": 0, "horizons_ms": []},
            "theory": {"tuples": 20, "draws": 1000000, "z_limit": 3.0},
            "sweep": {"key": "fa.rho", "values": [5, 10, 15, 20, 25]}
        })");
    }

    namespace
    {
        // Keys whose default is null accept a number or null.
        bool compatible(const Json &def, const Json &v)
        {
            if (def.is_null())
                return v.is_null() || v.is_number();
            if (def.is_number())
                return v.is_number();
            if (def.is_boolean())
                return v.is_boolean();
            if (def.is_string())
                return v.is_string();
            if (def.is_array())
                return v.is_array();
            if (def.is_object())
                return v.is_object();
            return false;
        }

        std::string type_of(const Json &def)
        {
            if (def.is_null() || def.is_number())
                return "number";
            if (def.is_boolean())
                return "boolean";
            if (def.is_string())
                return "string";
            if (def.is_array())
                return "array";
            return "object";
        }

        void check_entry_keys(const Json &obj, const std::vector<std::string> &allowed, const std::string &where)
        {
            if (!obj.is_object())
                throw ConfigError("key '" + where + "': expected an object");
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                    throw ConfigError("unknown key '" + where + "." + it.key() + "'");
        }

        // Merges src into dst, rejecting keys absent from the schema.
        void merge(Json &dst, const Json &src, const Json &schema, const std::string &prefix)
        {
            if (!src.is_object())
                throw ConfigError(prefix.empty() ? "configuration root must be an object"
                                                 : "key '" + prefix + "': expected an object");
            for (auto it = src.begin(); it != src.end(); ++it)
            {
                const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
                if (!schema.contains(it.key()))
                    throw ConfigError("unknown key '" + key + "'");
                const Json &def = schema.at(it.key());
                Json v = it.value();
                if (key == "speeds_kmh" && v.is_number())
                    v = Json::array({v});
                // fa.m may be cleared so that fa.rho determines it.
                const bool nullable = key == "fa.m" && v.is_null();
                if (!nullable && !compatible(def, v))
                    throw ConfigError("key '" + key + "': expected " + type_of(def));
                if (def.is_object())
                    merge(dst[it.key()], v, def, key);
                else
                    dst[it.key()] = v;
            }
        }

        template <class T>
        T get(const Json &doc, const std::string &dotted)
        {
            const Json *node = &doc;
            std::stringstream ss(dotted);
            std::string part;
            while (std::getline(ss, part, '.'))
                node = &node->at(part);
            try
            {
                return node->get<T>();
            }
            catch (const nlohmann::json::exception &)
            {
                throw ConfigError("key '" + dotted + "': wrong type");
            }
        }

        int get_int(const Json &doc, const std::string &dotted)
        {
            const double v = get<double>(doc, dotted);
            if (v != std::floor(v))
                throw ConfigError("key '" + dotted + "': expected an integer");
            return static_cast<int>(v);
        }

        std::vector<double> get_numbers(const Json &doc, const std::string &dotted)
        {
            const Json &arr = [&]() -> const Json &
            {
                const Json *node = &doc;
                std::stringstream ss(dotted);
                std::string part;
                while (std::getline(ss, part, '.'))
                    node = &node->at(part);
                return *node;
            }();
            std::vector<double> out;
            for (const auto &e : arr)
            {
                if (!e.is_number())
                    throw ConfigError("key '" + dotted + "': expected an array of numbers");
                out.push_back(e.get<double>());
            }
            return out;
        }
    }

    void apply_override(Json &doc, const std::string &assignment)
    {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + assignment + "' must look like key=value");
        const std::string key = assignment.substr(0, eq);
        const std::string text = assignment.substr(eq + 1);
        Json value;
        try
        {
            value = Json::parse(text);
        }
        catch (const nlohmann::json::exception &)
        {
            value = text;
        }
        // Build the nested object and merge it so the same checks apply.
        Json patch = value;
        std::vector<std::string> parts;
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, '.'))
            parts.push_back(part);
        for (auto it = parts.rbegin(); it != parts.rend(); ++it)
            patch = Json{{*it, patch}};
        merge(doc, patch, default_config(), "");
    }

    Json load_config(const std::string &path, const std::vector<std::string> &overrides)
    {
        Json doc = default_config();
        if (!path.empty())
        {
            std::ifstream in(path);
            if (!in)
                throw ConfigError("cannot open config file '" + path + "'");
            std::stringstream buf;
            buf << in.rdbuf();
            const std::string text = buf.str();
            if (text.find_first_not_of(" \t\r\n") != std::string::npos)
            {
                Json user;
                try
                {
                    user = Json::parse(text);
                }
                catch (const nlohmann::json::exception &e)
                {
                    throw ConfigError("config file '" + path + "' does not parse: " + e.what());
                }
                merge(doc, user, default_config(), "");
            }
        }
        for (const auto &o : overrides)
            apply_override(doc, o);
        return doc;
    }

    SimScenario scenario_from_json(Json &doc)
    {
        SimScenario sc;
        sc.carrier = get<double>(doc, "carrier_ghz") * 1e9;
        if (!(sc.carrier > 0.0))
            throw ConfigError("key 'carrier_ghz': must be positive");
        const double lambda = kSpeedOfLight / sc.carrier;
        sc.n_ue = get_int(doc, "n_ue");

        sc.bs.n_h = get_int(doc, "bs.n_h");
        sc.bs.n_v = get_int(doc, "bs.n_v");
        sc.bs.d_h = get<double>(doc, "bs.d_h") * lambda;
        sc.bs.d_v = get<double>(doc, "bs.d_v") * lambda;
        if (sc.bs.n_h < 1 || sc.bs.n_v < 1)
            throw ConfigError("key 'bs.n_h'/'bs.n_v': must be >= 1");
        if (!(sc.bs.d_h > 0.0) || !(sc.bs.d_v > 0.0))
            throw ConfigError("key 'bs.d_h'/'bs.d_v': must be positive");

        // Port count from m, or from rho when m is null.
        const double w = get<double>(doc, "fa.w");
        if (!(w > 0.0))
            throw ConfigError("key 'fa.w': must be positive");
        const Json &m_node = doc["fa"]["m"];
        const Json &rho_node = doc["fa"]["rho"];
        int m = 0;
        if (!m_node.is_null())
        {
            m = get_int(doc, "fa.m");
            if (!rho_node.is_null())
            {
                const double rho = rho_node.get<double>();
                if (std::abs((m - 1) / w - rho) >= 0.5)
                    throw ConfigError("keys 'fa.m', 'fa.w', 'fa.rho': (m - 1) / w = " + std::to_string((m - 1) / w) +
                                      " disagrees with rho = " + std::to_string(rho));
            }
        }
        else
        {
            if (rho_node.is_null())
                throw ConfigError("key 'fa.m': give fa.m or fa.rho");
            const double rho = rho_node.get<double>();
            if (!(rho > 0.0))
                throw ConfigError("key 'fa.rho': must be positive");
            m = static_cast<int>(round_half_away(rho * w)) + 1;
            doc["fa"]["m"] = m;
        }
        if (m < 2)
            throw ConfigError("key 'fa.m': must be >= 2");
        sc.fa = FluidAntennaGeometry{w, m, lambda};
        doc["fa"]["rho"] = sc.fa.port_density();

        sc.delay_spread = get<double>(doc, "delay_spread_ns") * 1e-9;
        sc.csi_delay = get<double>(doc, "csi_delay_ms") * 1e-3;
        sc.slot_duration = get<double>(doc, "slot_ms") * 1e-3;
        sc.speeds.clear();
        for (double v : get_numbers(doc, "speeds_kmh"))
        {
            if (v < 0.0)
                throw ConfigError("key 'speeds_kmh': speeds must be >= 0");
            sc.speeds.push_back(v / 3.6);
        }
        if (sc.speeds.empty())
            throw ConfigError("key 'speeds_kmh': must not be empty");
        sc.ricean_k = get<double>(doc, "ricean_k");
        if (sc.ricean_k < 0.0)
            throw ConfigError("key 'ricean_k': must be >= 0");

        const std::string mode = get<std::string>(doc, "velocity.mode");
        if (mode == "fa_axis")
            sc.velocity_mode = VelocityMode::fa_axis;
        else if (mode == "horizontal_random")
            sc.velocity_mode = VelocityMode::horizontal_random;
        else if (mode == "isotropic")
            sc.velocity_mode = VelocityMode::isotropic;
        else if (mode == "explicit")
            sc.velocity_mode = VelocityMode::explicit_vector;
        else
            throw ConfigError("key 'velocity.mode': expected fa_axis, horizontal_random, isotropic or explicit");
        const std::vector<double> dir = get_numbers(doc, "velocity.direction");
        if (dir.size() != 3)
            throw ConfigError("key 'velocity.direction': expected three numbers");
        sc.velocity_direction = Vec3(dir[0], dir[1], dir[2]);

        ScenarioSpec &ch = sc.channel;
        ch.carrier_freq = sc.carrier;
        ch.freq = doc["frequency_ghz"].is_null() ? 0.0 : doc["frequency_ghz"].get<double>() * 1e9;
        ch.ricean_k = sc.ricean_k;
        ch.include_los = get<bool>(doc, "channel.include_los");
        ch.tau_min = get<double>(doc, "channel.tau_min_ns") * 1e-9;
        ch.clusters.clear();
        for (const auto &c : doc["channel"]["clusters"])
        {
            check_entry_keys(c, {"n_paths", "power"}, "channel.clusters[]");
            ClusterSpec cs;
            if (c.contains("n_paths"))
            {
                if (!c["n_paths"].is_number_integer())
                    throw ConfigError("key 'channel.clusters[].n_paths': expected an integer");
                cs.n_paths = c["n_paths"].get<int>();
            }
            if (c.contains("power"))
            {
                if (!c["power"].is_number())
                    throw ConfigError("key 'channel.clusters[].power': expected number");
                cs.power = c["power"].get<double>();
            }
            if (cs.n_paths < 1)
                throw ConfigError("key 'channel.clusters[].n_paths': must be >= 1");
            if (cs.power < 0.0)
                throw ConfigError("key 'channel.clusters[].power': must be >= 0");
            ch.clusters.push_back(cs);
        }
        ch.table_cluster_powers = get_numbers(doc, "channel.cluster_powers");
        ch.path_table.clear();
        for (const auto &e : doc["channel"]["path_table"])
        {
            check_entry_keys(e, {"los", "cluster", "delay_ns", "eod", "aod", "eoa", "aoa", "doppler_hz"},
                             "channel.path_table[]");
            PathTableEntry p;
            auto num = [&](const char *k, double dflt)
            {
                if (!e.contains(k))
                    return dflt;
                if (!e[k].is_number())
                    throw ConfigError(std::string("key 'channel.path_table[].") + k + "': expected number");
                return e[k].get<double>();
            };
            if (e.contains("los"))
            {
                if (!e["los"].is_boolean())
                    throw ConfigError("key 'channel.path_table[].los': expected boolean");
                p.los = e["los"].get<bool>();
            }
            p.cluster = static_cast<int>(num("cluster", 0.0));
            p.delay = num("delay_ns", 0.0) * 1e-9;
            p.eod = num("eod", kPi / 2);
            p.aod = num("aod", 0.0);
            p.eoa = num("eoa", kPi / 2);
            p.aoa = num("aoa", 0.0);
            if (e.contains("doppler_hz"))
            {
                p.has_doppler = true;
                p.doppler = num("doppler_hz", 0.0);
            }
            ch.path_table.push_back(p);
        }
        if (ch.path_table.empty() && ch.clusters.empty())
            throw ConfigError("key 'channel.clusters': give at least one cluster or a path table");

        PencilConfig &pc = sc.pencil;
        pc.n_s = get_int(doc, "estimator.n_s");
        if (pc.n_s < 4 || pc.n_s % 2 != 0)
            throw ConfigError("key 'estimator.n_s': must be even and >= 4, got " + std::to_string(pc.n_s));
        pc.pencil_l = get_int(doc, "estimator.l");
        pc.pencil_r = get_int(doc, "estimator.r");
        pc.delta1 = get_int(doc, "estimator.delta1");
        pc.delta2 = get_int(doc, "estimator.delta2");
        pc.rank_threshold = get<double>(doc, "estimator.rank_threshold");
        const std::string rule = get<std::string>(doc, "estimator.order_rule");
        if (rule == "relative")
            pc.order_rule = OrderRule::relative;
        else if (rule == "noise_edge")
            pc.order_rule = OrderRule::noise_edge;
        else if (rule == "mdl")
            pc.order_rule = OrderRule::mdl;
        else
            throw ConfigError("key 'estimator.order_rule': expected relative, noise_edge or mdl");
        pc.noise_edge_factor = get<double>(doc, "estimator.noise_edge_factor");
        pc.max_order = get_int(doc, "estimator.max_order");
        pc.unit_circle_tol = get<double>(doc, "estimator.unit_circle_tol");
        pc.stack_columns = get<bool>(doc, "estimator.stack_columns");
        pc.sample_interval = sc.slot_duration;

        sc.snr_grid = get_numbers(doc, "sim.snr_db");
        sc.n_drops = get_int(doc, "sim.n_drops");
        sc.n_dl_slots = get_int(doc, "sim.n_dl_slots");
        if (!doc["sim"]["ul_snr_db"].is_null())
            sc.ul_snr_db = doc["sim"]["ul_snr_db"].get<double>();
        const std::string sel = get<std::string>(doc, "sim.selector_params");
        if (sel == "estimated")
            sc.selector_uses_truth = false;
        else if (sel == "truth")
            sc.selector_uses_truth = true;
        else
            throw ConfigError("key 'sim.selector_params': expected estimated or truth");
        sc.prony_history = get_int(doc, "sim.prony_history");
        sc.prony_order = get_int(doc, "sim.prony_order");
        sc.error_floor_db = get<double>(doc, "sim.error_floor_db");
        sc.master_seed = get<std::uint64_t>(doc, "seed");

        try
        {
            sc.validate();
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(std::string("invalid configuration: ") + e.what());
        }
        return sc;
    }

    RunConfig parse_config(const std::string &path, const std::vector<std::string> &overrides)
    {
        RunConfig rc;
        rc.doc = load_config(path, overrides);
        if (!rc.doc["seed"].is_number_unsigned() && !(rc.doc["seed"].is_number_integer() && rc.doc["seed"].get<long long>() >= 0))
            throw ConfigError("key 'seed': expected a nonnegative integer");
        rc.scenario = scenario_from_json(rc.doc);
        rc.seed = rc.scenario.master_seed;
        return rc;
    }

    std::string compact(const Json &doc)
    {
        return doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
    }

    std::uint64_t config_hash(const Json &doc)
    {
        return fnv1a64(compact(doc));
    }
}
