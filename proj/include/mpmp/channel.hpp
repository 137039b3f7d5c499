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

#ifndef MPMP_CHANNEL_HPP
#define MPMP_CHANNEL_HPP

#include "mpmp/common.hpp"

#include <vector>

namespace mpmp
{
    // Base-station uniform planar array in the yz plane.
    // Antenna (n_h, n_v), zero-based, sits at [0, d_h * n_h, d_v * n_v] and has
    // flat index n_h * n_v_count + n_v (Kronecker order a_h x a_v).
    struct UpaGeometry
    {
        int n_h = 2;
        int n_v = 8;
        double d_h = 0.0; // meters
        double d_v = 0.0; // meters

        int n_t() const { return n_h * n_v; }
        int index(int ih, int iv) const { return ih * n_v + iv; }
        void validate() const;

        // Array with half-wavelength spacing in both directions.
        static UpaGeometry half_wavelength(int n_h, int n_v, double wavelength);
    };

    // Fluid antenna: M ports on the z axis spanning W wavelengths.
    struct FluidAntennaGeometry
    {
        double w = 20.0;       // length in wavelengths
        int m_ports = 300;     // port count M
        double wavelength = 0; // meters

        double port_density() const { return (m_ports - 1) / w; }
        double port_spacing() const { return wavelength / port_density(); }
        double length() const { return w * wavelength; }
        // Position of port m (1-based) along z.
        double port_position(int m) const { return port_spacing() * (m - 1); }
        void validate() const;
    };

    struct Path
    {
        double alpha = 1.0;   // Ricean amplitude weight
        double beta = 1.0;    // cluster gain
        double delay = 0.0;   // seconds
        double doppler = 0.0; // hertz
        double eod = 0.0;     // theta, radians in [0, pi]
        double aod = 0.0;     // phi, radians in (-pi, pi]
        double eoa = 0.0;     // theta_rx, radians in [0, pi]
        double aoa = 0.0;     // phi_rx, radians in (-pi, pi]
    };

    struct PathSet
    {
        double ricean_k = 1.0;
        double carrier_freq = 39e9;
        double freq = 39e9; // frequency used in the delay phase term
        bool has_los = true;
        std::vector<Path> paths; // paths[0] is the LoS path when has_los

        double wavelength() const { return kSpeedOfLight / carrier_freq; }
    };

    // Minimal propagation description shared by true and estimated models:
    // complex gain at t = 0 and port 1, Doppler and three angles.
    struct Ray
    {
        cplx gain;
        double doppler = 0.0;
        double eod = 0.0;
        double aod = 0.0;
        double eoa = 0.0;
    };

    std::vector<Ray> to_rays(const PathSet &ps);

    struct ChannelSnapshot
    {
        double t = 0.0;
        int port = 1;
        CVec values;
    };

    // a_h(theta, phi) kron a_v(theta).
    CVec steering_vector(const UpaGeometry &geom, double wavelength, double eod, double aod);

    // Unit arrival direction [sin cos, sin sin, cos].
    Vec3 arrival_direction(double eoa, double aoa);

    double doppler_from_velocity(double eoa, double aoa, const Vec3 &velocity, double wavelength);

    // Channel of a ray set at time t and port m (1-based).
    CVec evaluate_rays(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                       double t, int m);

    // Steering matrix with one column per ray; with it, the channel at any
    // (t, m) is A * C_m(t).
    CMat steering_matrix(const std::vector<Ray> &rays, const UpaGeometry &bs, double wavelength);
    CVec evaluate_rays(const std::vector<Ray> &rays, const CMat &steering, double port_spacing, double wavelength,
                       double t, int m);

    ChannelSnapshot synthesize_channel(const PathSet &ps, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                                       double t, int m);

    ChannelSnapshot add_noise(const ChannelSnapshot &snap, double sigma2, Rng &rng);

    struct ClusterSpec
    {
        int n_paths = 36;
        double power = 1.0; // K'_s
    };

    // One explicit path. Doppler is derived from the UE velocity unless given.
    struct PathTableEntry
    {
        bool los = false;
        int cluster = 0; // NLoS cluster index
        double delay = 0.0;
        double eod = 0.0;
        double aod = 0.0;
        double eoa = 0.0;
        double aoa = 0.0;
        bool has_doppler = false;
        double doppler = 0.0;
    };

    struct ScenarioSpec
    {
        double carrier_freq = 39e9;
        double freq = 0.0; // 0 means carrier_freq
        double ricean_k = 1.0;
        bool include_los = true;
        std::vector<ClusterSpec> clusters{ClusterSpec{}};
        double tau_min = 0.0;
        double tau_max = 616e-9 * 3.4641016151377544; // uniform delays with 616 ns rms
        std::vector<PathTableEntry> path_table;  // explicit table (a) when nonempty
        std::vector<double> table_cluster_powers; // K'_s for table clusters
    };

    // Normalized cluster amplitudes beta_s = sqrt(K'_s / (P_s * sum K')).
    std::vector<double> cluster_betas(const std::vector<ClusterSpec> &clusters);

    PathSet generate_scenario(const ScenarioSpec &spec, const Vec3 &velocity, Rng &rng);
}

#endif
