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

#ifndef MPMP_PORT_SELECTOR_HPP
#define MPMP_PORT_SELECTOR_HPP

#include "mpmp/pencil.hpp"

#include <vector>

namespace mpmp
{
    // Total squared prediction error over all BS antennas,
    //   f(x) = sum_n || h_m(t + dt)[n] - h_1(t)[n] ||^2,  x = (m - 1) d_rx,
    // evaluated with the closed trigonometric sum over the array. Pair weights
    // are precomputed so one evaluation costs O(P^2) multiplies and O(P) sines.
    class ErrorFunctional
    {
    public:
        ErrorFunctional(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa, double t,
                        double dt);

        // f at a continuous liquid position x (meters from port 1).
        double at_position(double x) const;
        // f at x = i h for i = 0..n, using phase rotation between exact
        // resynchronizations; agrees with at_position to about 1e-12 relative.
        std::vector<double> at_grid(double h, long long n) const;
        double at_port(int m) const;

        // varsigma_p(x) = pi omega_p dt + pi cos(theta_rx_p) x / lambda.
        double varsigma(std::size_t p, double x) const;
        // delta_p for antenna (ih, iv): arg c_p + 2 pi omega_p t + BS phase.
        double delta(std::size_t p, int ih, int iv) const;

        std::size_t path_count() const { return mag_.size(); }
        const FluidAntennaGeometry &fa() const { return fa_; }
        const std::vector<Ray> &rays() const { return rays_; }
        double t() const { return t_; }
        double dt() const { return dt_; }

        // Dirichlet kernel sin(N x / 2) / sin(x / 2), with limit N at x -> 0 (mod 2 pi).
        static double dirichlet(int n, double x);

    private:
        std::vector<Ray> rays_;
        UpaGeometry bs_;
        FluidAntennaGeometry fa_;
        double t_;
        double dt_;
        std::vector<double> mag_;     // |c_p|
        std::vector<double> s0_;      // varsigma_p at x = 0
        std::vector<double> slope_;   // d varsigma_p / dx
        std::vector<double> psi0_;    // arg c_p + 2 pi omega_p t + half-array phase offsets
        std::vector<double> kh_, kv_; // BS phase increments per horizontal / vertical antenna
        Eigen::MatrixXd weight_;      // 8 |c_p||c_q| S_h S_v, strictly upper triangle used
        Eigen::MatrixXd sym_weight_;  // weight_ + weight_^T, zero diagonal
    };

    double error_norm_sq(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa, int m,
                         double t, double dt);
    double error_norm_sq(const PathSet &ps, const UpaGeometry &bs, const FluidAntennaGeometry &fa, int m, double t,
                         double dt);
    double error_norm_sq(const EstimatedModel &model, const UpaGeometry &bs, const FluidAntennaGeometry &fa, int m,
                         double t, double dt);

    // Explicit per-antenna double sum, used as a cross-check.
    double error_norm_sq_direct(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                                int m, double t, double dt);

    struct LosSelection
    {
        int port = 1;
        long long k = 0;          // wrap count of the zero that was used
        bool full_period = true;  // the FA holds at least one period T_LoS
    };

    // Single-path closed-form port. When several wrap counts k keep the port on
    // the FA, the one nearest to prev_port is taken; without a previous port
    // (prev_port <= 0) the k whose rounded port leaves the smallest residual wins.
    // Ties go to the smallest k.
    LosSelection select_port_los(const Ray &ray, const FluidAntennaGeometry &fa, double dt, int prev_port = 0);

    int select_port_multipath(const ErrorFunctional &f);
    int select_port_multipath(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                              double t, double dt);

    struct PeriodInfo
    {
        long long t_los = 0;              // |[rho / cos theta_rx]| of the first usable path
        std::vector<long long> t_p;       // signed rounded per-path periods, 0 for excluded paths
        long long t_eps = 0;              // lcm of |t_p|, saturated at saturation_limit
        double l_eps = 0.0;               // t_eps * d_rx, meters
        std::vector<bool> excluded;       // |cos theta_rx| < 1e-6
        bool saturated = false;           // lcm exceeded the limit; l_eps then exceeds any FA
        static constexpr long long saturation_limit = 1LL << 40;
    };

    PeriodInfo compute_periods(const std::vector<Ray> &rays, const FluidAntennaGeometry &fa);

    // argmin over all ports of f; ties to the lowest index.
    int brute_force_port(const ErrorFunctional &f);
    int brute_force_port(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa, double t,
                         double dt);

    struct PortSchedule
    {
        std::vector<double> horizons;     // seconds
        std::vector<int> ports;
        std::vector<long long> wrap_counts;
        std::vector<double> speeds;       // m/s, step i measured from horizon i - 1 (port 1 at dt = 0)
        std::vector<double> f_values;
        std::vector<double> speed_bounds; // W lambda / step duration
    };

    // One port per horizon: single-path models use the closed form (falling
    // back to the short-FA rule), multipath models the grid search.
    PortSchedule build_schedule(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                                double t0, const std::vector<double> &horizons);
}

#endif
