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

// Batch front end: simulate, sweep, estimate, select-port, verify-theory.

#include "mpmp/config.hpp"
#include "mpmp/csv.hpp"
#include "mpmp/linksim.hpp"
#include "mpmp/pencil.hpp"
#include "mpmp/port_selector.hpp"
#include "mpmp/theory.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mpmp;

namespace
{
    struct Options
    {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string out = ".";
        unsigned threads = 1;
        std::vector<std::string> sets;
        // estimate
        std::string input;
        std::string samples_out;
    };

    std::vector<std::string> overrides_of(const Options &o)
    {
        std::vector<std::string> ov = o.sets;
        if (o.seed)
            ov.push_back("seed=" + std::to_string(*o.seed));
        return ov;
    }

    std::string header_comment(const Json &doc, std::uint64_t seed)
    {
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash(doc)));
        return std::string("config_hash=") + hex + " seed=" + std::to_string(seed) + " config=" + compact(doc);
    }

    fs::path output_path(const Options &o, const std::string &name)
    {
        std::error_code ec;
        fs::create_directories(o.out, ec);
        if (!fs::is_directory(o.out))
            throw ConfigError("output directory '" + o.out + "' cannot be created");
        return fs::path(o.out) / name;
    }

    void write_table(const Options &o, const std::string &name, CsvTable &table, const RunConfig &rc)
    {
        table.comments.insert(table.comments.begin(), header_comment(rc.doc, rc.seed));
        const fs::path p = output_path(o, name);
        try
        {
            write_csv_file(p.string(), table);
        }
        catch (const std::runtime_error &e)
        {
            throw ConfigError(e.what());
        }
        std::cerr << "wrote " << p.string() << " (" << table.rows.size() << " rows)\n";
    }

    void append_summary(CsvTable &t, const SimScenario &sc, const SimSummary &sum, const std::vector<CsvValue> &prefix)
    {
        for (std::size_t s = 0; s < sc.snr_grid.size(); ++s)
            for (Method m : kAllMethods)
            {
                const int i = static_cast<int>(m);
                std::vector<CsvValue> row = prefix;
                row.push_back(sc.snr_grid[s]);
                row.push_back(method_name(m));
                row.push_back(sum.mean.se[i][s]);
                row.push_back(sum.se_ci[i][s]);
                row.push_back(linear_to_db(sum.mean.pred_error[i][s], sc.error_floor_db));
                t.rows.push_back(std::move(row));
            }
    }

    void report_failures(const SimSummary &sum)
    {
        if (sum.estimation_failures > 0)
            std::cerr << "note: " << sum.estimation_failures
                      << " estimation failures fell back to the no-prediction channel\n";
    }

    int cmd_simulate(const Options &o)
    {
        RunConfig rc = parse_config(o.config, overrides_of(o));
        const SimSummary sum = run_simulation(rc.scenario, o.threads);
        CsvTable t;
        t.header = {"snr_db", "method", "se", "se_ci", "pred_error_db"};
        append_summary(t, rc.scenario, sum, {});
        report_failures(sum);
        write_table(o, "simulate.csv", t, rc);
        return 0;
    }

    int cmd_sweep(const Options &o)
    {
        RunConfig base = parse_config(o.config, overrides_of(o));
        const std::string key = base.doc["sweep"]["key"].get<std::string>();
        const Json values = base.doc["sweep"]["values"];
        if (values.empty())
            throw ConfigError("key 'sweep.values': must not be empty");
        CsvTable t;
        t.header = {"key", "value", "snr_db", "method", "se", "se_ci", "pred_error_db"};
        for (const auto &v : values)
        {
            if (!v.is_number())
                throw ConfigError("key 'sweep.values': expected numbers");
            Json doc = load_config(o.config, overrides_of(o));
            // Sweeping the length or density keeps the other fixed and
            // re-derives the port count.
            if (key == "fa.w" || key == "fa.rho")
            {
                if (doc["fa"]["rho"].is_null())
                {
                    SimScenario probe = scenario_from_json(doc);
                    doc["fa"]["rho"] = probe.fa.port_density();
                }
                doc["fa"]["m"] = nullptr;
            }
            else if (key == "fa.m")
                doc["fa"]["rho"] = nullptr;
            apply_override(doc, key + "=" + v.dump());
            SimScenario sc = scenario_from_json(doc);
            std::cerr << key << " = " << v.dump() << " (M = " << sc.fa.m_ports << ")\n";
            const SimSummary sum = run_simulation(sc, o.threads);
            report_failures(sum);
            append_summary(t, sc, sum, {key, v.get<double>()});
        }
        write_table(o, "sweep.csv", t, base);
        return 0;
    }

    double ul_sigma2(const SimScenario &sc)
    {
        const double snr = sc.ul_snr_db.value_or(sc.snr_grid.empty() ? 30.0 : sc.snr_grid.back());
        return std::pow(10.0, -snr / 10.0);
    }

    UplinkSamples read_samples(const std::string &path, const SimScenario &sc, PencilConfig &cfg)
    {
        const ParsedCsv in = read_csv_file(path);
        const int ct = in.column("time_index"), ca = in.column("antenna_index"), cp = in.column("port_index"),
                  cr = in.column("re"), ci = in.column("im");
        if (ct < 0 || ca < 0 || cp < 0 || cr < 0 || ci < 0)
            throw ConfigError("samples file '" + path + "' needs columns time_index, antenna_index, port_index, re, im");
        const int nt = sc.bs.n_t();
        std::map<int, std::pair<int, CVec>> by_time;
        for (const auto &row : in.rows)
        {
            int k = 0, a = 0, p = 0;
            double re = 0.0, im = 0.0;
            try
            {
                k = std::stoi(row[ct]);
                a = std::stoi(row[ca]);
                p = std::stoi(row[cp]);
                re = std::stod(row[cr]);
                im = std::stod(row[ci]);
            }
            catch (const std::exception &)
            {
                throw ConfigError("samples file '" + path + "': malformed numeric field");
            }
            if (a < 0 || a >= nt)
                throw ConfigError("samples file '" + path + "': antenna_index " + std::to_string(a) + " outside [0, " +
                                  std::to_string(nt) + ")");
            auto it = by_time.find(k);
            if (it == by_time.end())
                it = by_time.emplace(k, std::make_pair(p, CVec::Constant(nt, cplx(NAN, NAN)))).first;
            if (it->second.first != p)
                throw ConfigError("samples file '" + path + "': mixed ports at time_index " + std::to_string(k));
            it->second.second(a) = cplx(re, im);
        }
        const int n = static_cast<int>(by_time.size());
        int expect = 1;
        for (const auto &kv : by_time)
        {
            if (kv.first != expect++)
                throw ConfigError("samples file '" + path + "': time_index must run 1..N_s without gaps");
            if (!kv.second.second.allFinite())
                throw ConfigError("samples file '" + path + "': missing antenna at time_index " +
                                  std::to_string(kv.first));
        }
        cfg.n_s = n;
        cfg = cfg.resolved(sc.bs, sc.fa);
        UplinkSamples s;
        for (const auto &kv : by_time)
        {
            const bool first = kv.first <= cfg.half();
            const int port = first ? cfg.delta1 : cfg.delta2;
            if (kv.second.first != port)
                throw ConfigError("samples file '" + path + "': time_index " + std::to_string(kv.first) +
                                  " should use port " + std::to_string(port));
            (first ? s.first : s.last).push_back(kv.second.second);
        }
        return s;
    }

    int cmd_estimate(const Options &o)
    {
        RunConfig rc = parse_config(o.config, overrides_of(o));
        const SimScenario &sc = rc.scenario;
        PencilConfig cfg = sc.pencil;
        cfg.sample_interval = sc.slot_duration;
        UplinkSamples samples;
        const double sigma2 = ul_sigma2(sc);
        if (!o.input.empty())
        {
            samples = read_samples(o.input, sc, cfg);
        }
        else
        {
            // Synthesize from the configured drop and UE.
            const int drop = rc.doc["select_port"]["drop"].get<int>();
            const int ue = rc.doc["select_port"]["ue"].get<int>();
            const std::uint64_t drop_seed = derive_seed(rc.seed, "drop", std::uint64_t(drop));
            const PathSet ps = ue_path_set(sc, drop_seed, ue);
            cfg = cfg.resolved(sc.bs, sc.fa);
            Rng noise(derive_seed(drop_seed, "ul", std::uint64_t(ue) * sc.snr_grid.size()));
            samples = collect_uplink_samples(to_rays(ps), sc.bs, sc.fa, cfg, sigma2, noise);
            if (!o.samples_out.empty())
            {
                CsvTable st;
                st.header = {"time_index", "antenna_index", "port_index", "re", "im"};
                const int h = cfg.half();
                for (int k = 0; k < 2 * h; ++k)
                {
                    const CVec &y = k < h ? samples.first[std::size_t(k)] : samples.last[std::size_t(k - h)];
                    const int port = k < h ? cfg.delta1 : cfg.delta2;
                    for (Eigen::Index a = 0; a < y.size(); ++a)
                        st.rows.push_back({std::int64_t(k + 1), std::int64_t(a), std::int64_t(port), y(a).real(),
                                           y(a).imag()});
                }
                Options so = o;
                const fs::path sp(o.samples_out);
                so.out = sp.has_parent_path() ? sp.parent_path().string() : o.out;
                write_table(so, sp.filename().string(), st, rc);
            }
        }
        if (cfg.order_rule == OrderRule::noise_edge)
        {
            if (sigma2 > 0.0)
                cfg.noise_var = sigma2;
            else
                cfg.order_rule = OrderRule::relative;
        }
        const EstimationResult er = estimate_model(samples, sc.bs, sc.fa, cfg);
        if (!er.pencil_window_ok)
            std::cerr << "note: pencil size lies outside its validity window for the estimated order\n";
        CsvTable t;
        t.header = {"path", "doppler_hz", "eod", "aod", "eoa", "gain_re", "gain_im"};
        for (std::size_t p = 0; p < er.model.paths.size(); ++p)
        {
            const EstimatedPath &e = er.model.paths[p];
            t.rows.push_back({std::int64_t(p), e.doppler, e.eod, e.aod, e.eoa, e.gain.real(), e.gain.imag()});
        }
        write_table(o, "estimate.csv", t, rc);
        return 0;
    }

    int cmd_select_port(const Options &o)
    {
        RunConfig rc = parse_config(o.config, overrides_of(o));
        const SimScenario &sc = rc.scenario;
        const Json &sp = rc.doc["select_port"];
        const std::string model = sp["model"].get<std::string>();
        if (model != "truth" && model != "estimated")
            throw ConfigError("key 'select_port.model': expected truth or estimated");
        const int drop = sp["drop"].get<int>();
        const int ue = sp["ue"].get<int>();
        if (drop < 0 || ue < 0 || ue >= sc.n_ue)
            throw ConfigError("keys 'select_port.drop'/'select_port.ue': out of range");
        const std::uint64_t drop_seed = derive_seed(rc.seed, "drop", std::uint64_t(drop));
        const std::vector<Ray> truth = to_rays(ue_path_set(sc, drop_seed, ue));

        PencilConfig cfg = sc.pencil;
        cfg.sample_interval = sc.slot_duration;
        cfg = cfg.resolved(sc.bs, sc.fa);
        std::vector<Ray> rays = truth;
        if (model == "estimated")
        {
            const double sigma2 = ul_sigma2(sc);
            Rng noise(derive_seed(drop_seed, "ul", std::uint64_t(ue) * sc.snr_grid.size()));
            UplinkSamples samples = collect_uplink_samples(truth, sc.bs, sc.fa, cfg, sigma2, noise);
            if (cfg.order_rule == OrderRule::noise_edge)
            {
                if (sigma2 > 0.0)
                    cfg.noise_var = sigma2;
                else
                    cfg.order_rule = OrderRule::relative;
            }
            rays = estimate_model(samples, sc.bs, sc.fa, cfg).model.rays();
        }

        std::vector<double> horizons;
        for (const auto &h : sp["horizons_ms"])
        {
            if (!h.is_number() || !(h.get<double>() > 0.0))
                throw ConfigError("key 'select_port.horizons_ms': expected positive numbers");
            horizons.push_back(h.get<double>() * 1e-3);
        }
        if (horizons.empty())
            for (int j = 0; j < sc.n_dl_slots; ++j)
                horizons.push_back(sc.csi_delay + j * sc.slot_duration);
        const double t0 = cfg.n_s * sc.slot_duration;
        const PortSchedule s = build_schedule(rays, sc.bs, sc.fa, t0, horizons);
        CsvTable t;
        t.header = {"dt_s", "port", "k", "speed_mps", "f_value"};
        for (std::size_t i = 0; i < s.ports.size(); ++i)
            t.rows.push_back({s.horizons[i], std::int64_t(s.ports[i]), std::int64_t(s.wrap_counts[i]), s.speeds[i],
                              s.f_values[i]});
        write_table(o, "schedule.csv", t, rc);
        return 0;
    }

    int cmd_verify_theory(const Options &o)
    {
        RunConfig rc = parse_config(o.config, overrides_of(o));
        const Json &th = rc.doc["theory"];
        const int tuples = th["tuples"].get<int>();
        const double draws = th["draws"].get<double>();
        const double z_limit = th["z_limit"].get<double>();
        if (tuples < 1)
            throw ConfigError("key 'theory.tuples': must be >= 1");
        if (draws < 100 || draws != std::floor(draws))
            throw ConfigError("key 'theory.draws': must be an integer >= 100");
        CsvTable t;
        t.header = {"tuple", "term", "closed_form", "mc_mean", "mc_se", "z_score", "pass"};
        int failed = 0;
        for (int i = 0; i < tuples; ++i)
        {
            Rng rng(derive_seed(rc.seed, "theory_tuple", std::uint64_t(i)));
            const BoundInputs in = random_bound_inputs(rng);
            for (int k = 0; k <= static_cast<int>(Term::non_cross); ++k)
            {
                const Term term = static_cast<Term>(k);
                const double cf = closed_form(term, in);
                const McResult mc = monte_carlo_expectation(term, in, std::size_t(draws),
                                                            derive_seed(rc.seed, "theory_mc", std::uint64_t(i)),
                                                            o.threads);
                const double diff = mc.mean - cf;
                const double z = mc.standard_error > 0.0 ? diff / mc.standard_error : (diff == 0.0 ? 0.0 : INFINITY);
                const bool pass = std::abs(z) <= z_limit || std::abs(diff) <= 1e-12;
                failed += pass ? 0 : 1;
                t.rows.push_back({std::int64_t(i), term_name(term), cf, mc.mean, mc.standard_error, z,
                                  std::int64_t(pass ? 1 : 0)});
            }
        }
        std::cerr << failed << " of " << t.rows.size() << " comparisons exceed " << z_limit << " standard errors\n";
        write_table(o, "theory.csv", t, rc);
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"mpmp: moving-port channel prediction for fluid-antenna receivers"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App *sub)
    {
        sub->add_option("--config", o.config, "JSON configuration file (defaults when omitted)");
        sub->add_option("--seed", o.seed, "master seed (overrides the config)");
        sub->add_option("--out", o.out, "output directory")->capture_default_str();
        sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
        sub->add_option("--set", o.sets, "override key=value (repeatable)");
    };
    auto *sim = app.add_subcommand("simulate", "link-level simulation over all drops");
    auto *sweep = app.add_subcommand("sweep", "simulation over sweep.values of sweep.key");
    auto *est = app.add_subcommand("estimate", "offline path-parameter estimation");
    auto *sel = app.add_subcommand("select-port", "port schedule for one UE");
    auto *theo = app.add_subcommand("verify-theory", "closed forms against Monte Carlo");
    for (auto *s : {sim, sweep, est, sel, theo})
        add_common(s);
    est->add_option("--input", o.input, "samples CSV (time_index, antenna_index, port_index, re, im)");
    est->add_option("--samples-out", o.samples_out, "write the synthesized samples to this CSV");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 1;
    }

    try
    {
        o.threads = resolve_threads(o.threads);
        if (sim->parsed())
            return cmd_simulate(o);
        if (sweep->parsed())
            return cmd_sweep(o);
        if (est->parsed())
            return cmd_estimate(o);
        if (sel->parsed())
            return cmd_select_port(o);
        return cmd_verify_theory(o);
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception &e)
    {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
}
