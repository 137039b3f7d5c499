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

#include "mpmp/channel.hpp"

#include <cmath>
#include <map>
#include <string>

namespace mpmp
{
    void UpaGeometry::validate() const
    {
        if (n_h < 1 || n_v < 1)
            throw ConfigError("UpaGeometry: n_h and n_v must be >= 1");
        if (!(d_h > 0.0) || !(d_v > 0.0))
            throw ConfigError("UpaGeometry: spacings must be positive");
    }

    UpaGeometry UpaGeometry::half_wavelength(int n_h, int n_v, double wavelength)
    {
        return UpaGeometry{n_h, n_v, 0.5 * wavelength, 0.5 * wavelength};
    }

    void FluidAntennaGeometry::validate() const
    {
        if (m_ports < 2)
            throw ConfigError("FluidAntennaGeometry: m_ports must be >= 2");
        if (!(w > 0.0))
            throw ConfigError("FluidAntennaGeometry: w must be positive");
        if (!(wavelength > 0.0))
            throw ConfigError("FluidAntennaGeometry: wavelength must be positive");
    }

    std::vector<Ray> to_rays(const PathSet &ps)
    {
        std::vector<Ray> rays;
        rays.reserve(ps.paths.size());
        for (const auto &p : ps.paths)
        {
            cplx g = p.alpha * p.beta * std::exp(kJ * (2.0 * kPi * ps.freq * p.delay));
            rays.push_back(Ray{g, p.doppler, p.eod, p.aod, p.eoa});
        }
        return rays;
    }

    CVec steering_vector(const UpaGeometry &geom, double wavelength, double eod, double aod)
    {
        const double kh = 2.0 * kPi / wavelength * std::sin(eod) * std::sin(aod) * geom.d_h;
        const double kv = 2.0 * kPi / wavelength * std::cos(eod) * geom.d_v;
        CVec a(geom.n_t());
        for (int ih = 0; ih < geom.n_h; ++ih)
        {
            for (int iv = 0; iv < geom.n_v; ++iv)
            {
                // A phase of exactly zero yields exactly 1 + 0j.
                a(geom.index(ih, iv)) = std::polar(1.0, kh * ih + kv * iv);
            }
        }
        return a;
    }

    Vec3 arrival_direction(double eoa, double aoa)
    {
        return Vec3(std::sin(eoa) * std::cos(aoa), std::sin(eoa) * std::sin(aoa), std::cos(eoa));
    }

    double doppler_from_velocity(double eoa, double aoa, const Vec3 &velocity, double wavelength)
    {
        return arrival_direction(eoa, aoa).dot(velocity) / wavelength;
    }

    CMat steering_matrix(const std::vector<Ray> &rays, const UpaGeometry &bs, double wavelength)
    {
        CMat A(bs.n_t(), static_cast<Eigen::Index>(rays.size()));
        for (std::size_t p = 0; p < rays.size(); ++p)
            A.col(static_cast<Eigen::Index>(p)) = steering_vector(bs, wavelength, rays[p].eod, rays[p].aod);
        return A;
    }

    CVec evaluate_rays(const std::vector<Ray> &rays, const CMat &steering, double port_spacing, double wavelength,
                       double t, int m)
    {
        CVec c(static_cast<Eigen::Index>(rays.size()));
        for (std::size_t p = 0; p < rays.size(); ++p)
        {
            const Ray &r = rays[p];
            double ph = 2.0 * kPi * r.doppler * t + 2.0 * kPi / wavelength * std::cos(r.eoa) * port_spacing * (m - 1);
            c(static_cast<Eigen::Index>(p)) = r.gain * std::polar(1.0, ph);
        }
        return steering * c;
    }

    CVec evaluate_rays(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                       double t, int m)
    {
        if (m < 1 || m > fa.m_ports)
            throw std::out_of_range("port index " + std::to_string(m) + " outside [1, " +
                                    std::to_string(fa.m_ports) + "]");
        return evaluate_rays(rays, steering_matrix(rays, bs, fa.wavelength), fa.port_spacing(), fa.wavelength, t, m);
    }

    ChannelSnapshot synthesize_channel(const PathSet &ps, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                                       double t, int m)
    {
        return ChannelSnapshot{t, m, evaluate_rays(to_rays(ps), bs, fa, t, m)};
    }

    ChannelSnapshot add_noise(const ChannelSnapshot &snap, double sigma2, Rng &rng)
    {
        if (sigma2 < 0.0)
            throw std::invalid_argument("add_noise: sigma2 must be >= 0");
        ChannelSnapshot out = snap;
        if (sigma2 == 0.0)
            return out;
        for (Eigen::Index n = 0; n < out.values.size(); ++n)
            out.values(n) += complex_normal(rng, sigma2);
        return out;
    }

    std::vector<double> cluster_betas(const std::vector<ClusterSpec> &clusters)
    {
        double total = 0.0;
        for (const auto &c : clusters)
        {
            if (c.power < 0.0)
                throw ConfigError("cluster power must be >= 0");
            if (c.n_paths < 1)
                throw ConfigError("cluster path count must be >= 1");
            total += c.power;
        }
        if (!(total > 0.0))
            throw ConfigError("total cluster power must be positive");
        std::vector<double> betas;
        for (const auto &c : clusters)
            betas.push_back(std::sqrt(c.power / (c.n_paths * total)));
        return betas;
    }

    namespace
    {
        double los_weight(double k) { return std::sqrt(k / (1.0 + k)); }
        double nlos_weight(double k) { return std::sqrt(1.0 / (1.0 + k)); }
    }

    PathSet generate_scenario(const ScenarioSpec &spec, const Vec3 &velocity, Rng &rng)
    {
        if (spec.ricean_k < 0.0)
            throw ConfigError("ricean_k must be >= 0");
        PathSet ps;
        ps.ricean_k = spec.ricean_k;
        ps.carrier_freq = spec.carrier_freq;
        ps.freq = spec.freq > 0.0 ? spec.freq : spec.carrier_freq;
        const double lambda = ps.wavelength();

        if (!spec.path_table.empty())
        {
            // Explicit table: count paths per cluster, then normalize.
            std::map<int, int> counts;
            bool los = false;
            for (const auto &e : spec.path_table)
            {
                if (e.los)
                {
                    if (los)
                        throw ConfigError("path table: at most one LoS entry");
                    los = true;
                }
                else
                {
                    if (e.cluster < 0)
                        throw ConfigError("path table: negative cluster index");
                    counts[e.cluster]++;
                }
            }
            std::vector<ClusterSpec> clusters;
            std::map<int, std::size_t> slot;
            for (auto [cl, n] : counts)
            {
                double power = 1.0;
                if (!spec.table_cluster_powers.empty())
                {
                    if (static_cast<std::size_t>(cl) >= spec.table_cluster_powers.size())
                        throw ConfigError("path table: cluster index without a power entry");
                    power = spec.table_cluster_powers[static_cast<std::size_t>(cl)];
                }
                slot[cl] = clusters.size();
                clusters.push_back(ClusterSpec{n, power});
            }
            std::vector<double> betas = clusters.empty() ? std::vector<double>{} : cluster_betas(clusters);
            ps.has_los = los;
            const double a_nlos = los ? nlos_weight(spec.ricean_k) : 1.0;
            // LoS first, then the table order.
            for (int pass = 0; pass < 2; ++pass)
            {
                for (const auto &e : spec.path_table)
                {
                    if ((pass == 0) != e.los)
                        continue;
                    Path p;
                    p.alpha = e.los ? (counts.empty() ? 1.0 : los_weight(spec.ricean_k)) : a_nlos;
                    p.beta = e.los ? 1.0 : betas[slot[e.cluster]];
                    p.delay = e.delay;
                    p.eod = e.eod;
                    p.aod = e.aod;
                    p.eoa = e.eoa;
                    p.aoa = e.aoa;
                    p.doppler = e.has_doppler ? e.doppler : doppler_from_velocity(e.eoa, e.aoa, velocity, lambda);
                    ps.paths.push_back(p);
                }
            }
            return ps;
        }

        if (spec.tau_min > spec.tau_max)
            throw ConfigError("tau_min must not exceed tau_max");
        if (spec.clusters.empty())
            throw ConfigError("synthetic scenario needs at least one cluster");
        std::vector<double> betas = cluster_betas(spec.clusters);

        std::uniform_real_distribution<double> u01(0.0, 1.0);
        auto draw_path = [&](double alpha, double beta)
        {
            Path p;
            p.alpha = alpha;
            p.beta = beta;
            p.delay = spec.tau_min + (spec.tau_max - spec.tau_min) * u01(rng);
            p.eod = kPi * u01(rng);
            p.aod = kPi - 2.0 * kPi * u01(rng); // (-pi, pi]
            p.eoa = kPi * u01(rng);
            p.aoa = kPi - 2.0 * kPi * u01(rng);
            p.doppler = doppler_from_velocity(p.eoa, p.aoa, velocity, lambda);
            return p;
        };

        ps.has_los = spec.include_los;
        if (spec.include_los)
            ps.paths.push_back(draw_path(los_weight(spec.ricean_k), 1.0));
        const double a_nlos = spec.include_los ? nlos_weight(spec.ricean_k) : 1.0;
        for (std::size_t s = 0; s < spec.clusters.size(); ++s)
            for (int k = 0; k < spec.clusters[s].n_paths; ++k)
                ps.paths.push_back(draw_path(a_nlos, betas[s]));
        return ps;
    }
}
