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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace mpmp;
using Catch::Approx;

namespace
{
    const double kLambda = kSpeedOfLight / 39e9;

    // Phase of antenna (ih, iv) computed from its position and the departure
    // direction, independently of the Kronecker construction.
    cplx direct_element(const UpaGeometry &g, double lambda, double eod, double aod, int ih, int iv)
    {
        const Vec3 pos(0.0, g.d_h * ih, g.d_v * iv);
        const Vec3 r(std::sin(eod) * std::cos(aod), std::sin(eod) * std::sin(aod), std::cos(eod));
        return std::exp(kJ * (2.0 * kPi / lambda * r.dot(pos)));
    }

    // Double loop over paths and antennas straight from the path parameters.
    CVec direct_channel(const PathSet &ps, const UpaGeometry &bs, const FluidAntennaGeometry &fa, double t, int m)
    {
        const double lambda = ps.wavelength();
        CVec h = CVec::Zero(bs.n_t());
        for (const Path &p : ps.paths)
        {
            const cplx c = p.alpha * p.beta * std::exp(kJ * (2.0 * kPi * ps.freq * p.delay));
            const cplx time = std::exp(kJ * (2.0 * kPi * p.doppler * t));
            const cplx port = std::exp(kJ * (2.0 * kPi / lambda * std::cos(p.eoa) * fa.port_spacing() * (m - 1)));
            for (int ih = 0; ih < bs.n_h; ++ih)
                for (int iv = 0; iv < bs.n_v; ++iv)
                    h(ih * bs.n_v + iv) += c * time * port * direct_element(bs, lambda, p.eod, p.aod, ih, iv);
        }
        return h;
    }

    PathSet random_paths(int count, Rng &rng)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        PathSet ps;
        ps.has_los = false;
        for (int i = 0; i < count; ++i)
        {
            Path p;
            p.alpha = 0.3 + u(rng);
            p.beta = 0.2 + u(rng);
            p.delay = 1e-6 * u(rng);
            p.doppler = 4000.0 * (u(rng) - 0.5);
            p.eod = kPi * u(rng);
            p.aod = kPi - 2.0 * kPi * u(rng);
            p.eoa = kPi * u(rng);
            p.aoa = kPi - 2.0 * kPi * u(rng);
            ps.paths.push_back(p);
        }
        return ps;
    }
}

TEST_CASE("fluid antenna geometry relations", "[channel]")
{
    FluidAntennaGeometry fa{20.0, 300, kLambda};
    CHECK(fa.port_density() == Approx(299.0 / 20.0));
    CHECK(fa.port_spacing() * (fa.m_ports - 1) == Approx(fa.w * kLambda).epsilon(1e-12));
    CHECK(fa.port_position(1) == 0.0);
    CHECK(fa.port_position(300) == Approx(fa.length()).epsilon(1e-12));
    CHECK_THROWS_AS((FluidAntennaGeometry{20.0, 1, kLambda}.validate()), ConfigError);
    CHECK_THROWS_AS((FluidAntennaGeometry{0.0, 300, kLambda}.validate()), ConfigError);
    UpaGeometry bad{0, 8, 1.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK(UpaGeometry::half_wavelength(2, 8, kLambda).n_t() == 16);
}

TEST_CASE("steering vector structure", "[channel]")
{
    const UpaGeometry g = UpaGeometry::half_wavelength(4, 3, kLambda);
    SECTION("first entry is exactly one and all entries unit modulus")
    {
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j)
            {
                const double eod = kPi * i / 9.0, aod = -kPi + 2.0 * kPi * j / 9.0;
                const CVec a = steering_vector(g, kLambda, eod, aod);
                REQUIRE(a(0) == cplx(1.0, 0.0));
                for (Eigen::Index n = 0; n < a.size(); ++n)
                    REQUIRE(std::abs(std::abs(a(n)) - 1.0) < 1e-12);
            }
    }
    SECTION("zero azimuth repeats the vertical vector")
    {
        const CVec a = steering_vector(g, kLambda, 1.1, 0.0);
        for (int ih = 1; ih < g.n_h; ++ih)
            for (int iv = 0; iv < g.n_v; ++iv)
                CHECK(a(g.index(ih, iv)) == a(g.index(0, iv)));
    }
    SECTION("matches per-antenna phase oracle on a 2x2 array")
    {
        const UpaGeometry g2 = UpaGeometry::half_wavelength(2, 2, kLambda);
        const CVec a = steering_vector(g2, kLambda, kPi / 3, kPi / 4);
        for (int ih = 0; ih < 2; ++ih)
            for (int iv = 0; iv < 2; ++iv)
                CHECK(std::abs(a(g2.index(ih, iv)) - direct_element(g2, kLambda, kPi / 3, kPi / 4, ih, iv)) < 1e-12);
    }
    SECTION("Kronecker identity on a 10x10 grid")
    {
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j)
            {
                const double eod = 0.05 + 3.0 * i / 9.0, aod = -3.0 + 6.0 * j / 9.0;
                CVec ah(g.n_h), av(g.n_v);
                for (int ih = 0; ih < g.n_h; ++ih)
                    ah(ih) = std::exp(kJ * (2.0 * kPi / kLambda * g.d_h * ih * std::sin(eod) * std::sin(aod)));
                for (int iv = 0; iv < g.n_v; ++iv)
                    av(iv) = std::exp(kJ * (2.0 * kPi / kLambda * g.d_v * iv * std::cos(eod)));
                const CVec a = steering_vector(g, kLambda, eod, aod);
                for (int ih = 0; ih < g.n_h; ++ih)
                    for (int iv = 0; iv < g.n_v; ++iv)
                        REQUIRE(std::abs(a(ih * g.n_v + iv) - ah(ih) * av(iv)) < 1e-12);
            }
    }
}

TEST_CASE("doppler from velocity", "[channel]")
{
    const double eoa = 1.0, aoa = 0.4;
    const Vec3 r = arrival_direction(eoa, aoa);
    CHECK(r.norm() == Approx(1.0).epsilon(1e-15));
    const Vec3 ortho = r.cross(Vec3(0.3, -0.2, 1.0)).normalized() * 20.0;
    CHECK(std::abs(doppler_from_velocity(eoa, aoa, ortho, kLambda)) < 1e-9);

    const double v = 120.0 / 3.6;
    const double parallel = doppler_from_velocity(eoa, aoa, v * r, kLambda);
    CHECK(parallel == Approx(v / (kSpeedOfLight / 39e9)).epsilon(1e-12));
    CHECK(parallel == Approx(4336.0).margin(1.0));

    // A unit vector at 60 degrees from r.
    const Vec3 side = ortho.normalized();
    const Vec3 at60 = (std::cos(kPi / 3) * r + std::sin(kPi / 3) * side) * v;
    CHECK(doppler_from_velocity(eoa, aoa, at60, kLambda) == Approx(parallel / 2.0).epsilon(1e-12));
}

TEST_CASE("channel synthesis", "[channel]")
{
    const UpaGeometry bs = UpaGeometry::half_wavelength(2, 4, kLambda);
    const FluidAntennaGeometry fa{20.0, 300, kLambda};

    SECTION("pure LoS at the origin gives the delay phase")
    {
        PathSet ps;
        Path p;
        p.alpha = p.beta = 1.0;
        p.delay = 123e-9;
        p.doppler = 777.0;
        p.eod = 0.7;
        p.aod = 0.2;
        p.eoa = 1.3;
        ps.paths = {p};
        const ChannelSnapshot s = synthesize_channel(ps, bs, fa, 0.0, 1);
        CHECK(std::abs(s.values(0) - std::exp(kJ * (2.0 * kPi * ps.freq * p.delay))) < 1e-12);
        CHECK(s.values.size() == bs.n_t());
    }
    SECTION("single path time shift and port phase properties")
    {
        Rng rng(5);
        const PathSet ps = random_paths(1, rng);
        const double t = 0.0123, dt = 0.0027;
        const CVec a = synthesize_channel(ps, bs, fa, t, 17).values;
        const CVec b = synthesize_channel(ps, bs, fa, t + dt, 17).values;
        const cplx rot = std::exp(kJ * (2.0 * kPi * ps.paths[0].doppler * dt));
        for (Eigen::Index n = 0; n < a.size(); ++n)
            CHECK(std::abs(b(n) - a(n) * rot) < 1e-12);
        const CVec c = synthesize_channel(ps, bs, fa, t, 18).values;
        const cplx step =
            std::exp(kJ * (2.0 * kPi / kLambda * std::cos(ps.paths[0].eoa) * fa.port_spacing()));
        for (Eigen::Index n = 0; n < a.size(); ++n)
            CHECK(std::abs(c(n) / a(n) - step) < 1e-12);
    }
    SECTION("five random paths match the double-loop oracle")
    {
        Rng rng(9);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial)
        {
            const PathSet ps = random_paths(5, rng);
            const double t = 0.05 * u(rng);
            const int m = 1 + int(u(rng) * 299.999);
            const CVec h = synthesize_channel(ps, bs, fa, t, m).values;
            const CVec ref = direct_channel(ps, bs, fa, t, m);
            REQUIRE((h - ref).norm() < 1e-12 * std::max(1.0, ref.norm()));
        }
    }
    SECTION("linearity over disjoint path sets")
    {
        Rng rng(10);
        PathSet a = random_paths(3, rng), b = random_paths(4, rng);
        PathSet both = a;
        both.paths.insert(both.paths.end(), b.paths.begin(), b.paths.end());
        const CVec sum = synthesize_channel(a, bs, fa, 0.01, 40).values + synthesize_channel(b, bs, fa, 0.01, 40).values;
        CHECK((synthesize_channel(both, bs, fa, 0.01, 40).values - sum).norm() < 1e-12);
    }
    SECTION("port out of range is rejected")
    {
        Rng rng(1);
        const PathSet ps = random_paths(1, rng);
        CHECK_THROWS(synthesize_channel(ps, bs, fa, 0.0, 0));
        CHECK_THROWS(synthesize_channel(ps, bs, fa, 0.0, 301));
    }
}

TEST_CASE("noise injection", "[channel]")
{
    ChannelSnapshot s;
    s.values = CVec::Zero(4096);
    Rng rng(77);
    CHECK(add_noise(s, 0.0, rng).values == s.values);
    const CVec n = add_noise(s, 1.0, rng).values;
    const double var = n.squaredNorm() / double(n.size());
    CHECK(var == Approx(1.0).epsilon(0.05));
    Rng r1(3), r2(3);
    CHECK(add_noise(s, 0.5, r1).values == add_noise(s, 0.5, r2).values);
}

TEST_CASE("scenario generation", "[channel]")
{
    ScenarioSpec spec;
    spec.ricean_k = 1.0;
    const Vec3 v(0.0, 0.0, -120.0 / 3.6);
    Rng rng(42);
    const PathSet ps = generate_scenario(spec, v, rng);
    REQUIRE(ps.paths.size() == 37);
    CHECK(ps.paths[0].alpha == Approx(std::sqrt(0.5)));
    for (std::size_t p = 1; p < ps.paths.size(); ++p)
    {
        CHECK(ps.paths[p].beta == Approx(1.0 / 6.0).epsilon(1e-15));
        CHECK(ps.paths[p].alpha == Approx(std::sqrt(0.5)));
        CHECK(ps.paths[p].delay >= spec.tau_min);
        CHECK(ps.paths[p].delay <= spec.tau_max);
        CHECK(ps.paths[p].doppler ==
              Approx(doppler_from_velocity(ps.paths[p].eoa, ps.paths[p].aoa, v, ps.wavelength())).epsilon(1e-12));
    }

    SECTION("cluster betas normalize total NLoS power")
    {
        std::vector<ClusterSpec> cl{{10, 2.0}, {5, 1.0}, {3, 0.5}};
        const auto b = cluster_betas(cl);
        double total = 0.0;
        for (std::size_t s = 0; s < cl.size(); ++s)
            total += cl[s].n_paths * b[s] * b[s];
        CHECK(total == Approx(1.0).epsilon(1e-13));
        CHECK_THROWS_AS(cluster_betas({{3, -1.0}}), ConfigError);
    }
    SECTION("arrival elevation is uniform on [0, pi]")
    {
        ScenarioSpec big;
        big.include_los = false;
        big.clusters = {{100000, 1.0}};
        Rng r(11);
        const PathSet many = generate_scenario(big, Vec3::Zero(), r);
        double sum = 0.0, sq = 0.0;
        for (const auto &p : many.paths)
        {
            const double c = std::cos(p.eoa);
            sum += c;
            sq += c * c;
            REQUIRE(p.eoa >= 0.0);
            REQUIRE(p.eoa <= kPi);
        }
        const double n = double(many.paths.size());
        const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / n);
        CHECK(std::abs(mean) < 3.0 * se);
    }
    SECTION("invalid specs are rejected")
    {
        ScenarioSpec bad = spec;
        bad.tau_min = 2e-6;
        bad.tau_max = 1e-6;
        CHECK_THROWS_AS(generate_scenario(bad, v, rng), ConfigError);
        ScenarioSpec none = spec;
        none.clusters.clear();
        CHECK_THROWS_AS(generate_scenario(none, v, rng), ConfigError);
    }
    SECTION("explicit path table is used verbatim")
    {
        ScenarioSpec tab;
        tab.ricean_k = 3.0;
        tab.path_table = {PathTableEntry{true, 0, 10e-9, 0.5, 0.1, 1.0, 0.2, false, 0.0},
                          PathTableEntry{false, 0, 20e-9, 1.5, -0.1, 2.0, -0.2, true, 55.0},
                          PathTableEntry{false, 0, 30e-9, 2.5, 0.3, 0.5, 0.7, false, 0.0}};
        tab.table_cluster_powers = {1.0};
        Rng r(1);
        const PathSet t = generate_scenario(tab, v, r);
        REQUIRE(t.paths.size() == 3);
        CHECK(t.paths[0].alpha == Approx(std::sqrt(0.75)));
        CHECK(t.paths[1].beta == Approx(1.0 / std::sqrt(2.0)));
        CHECK(t.paths[1].doppler == 55.0);
        CHECK(t.paths[2].eod == 2.5);
        CHECK(t.paths[2].doppler == Approx(doppler_from_velocity(0.5, 0.7, v, t.wavelength())));
    }
}
