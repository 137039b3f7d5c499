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

#ifndef MPMP_THEORY_HPP
#define MPMP_THEORY_HPP

#include "mpmp/channel.hpp"

#include <string>
#include <vector>

namespace mpmp
{
    // Bessel function of the first kind, order zero. Power series up to
    // |x| = 12, Hankel asymptotic expansion beyond; about 1e-12 absolute.
    double bessel_j0(double x);

    // Inputs of the large-P error terms for one BS antenna (n_h, n_v), one
    // port m, reference time t and CSI delay tau_d:
    //   (a1, b1, c1) = (pi tau_d v + [0, 0, pi (m - 1) d_rx]) / lambda
    //   (d1, e1, f1) = 2 pi t v / lambda
    //   d_nh = pi d_h (n_h - 1) / lambda, d_nv = pi d_v (n_v - 1) / lambda.
    // NLoS paths have varsigma = (a1, b1, c1) . r_rx and
    // delta = 2 pi f tau + (d1, e1, f1) . r_rx + 2 d_nh sin(eod) sin(aod) + 2 d_nv cos(eod).
    struct BoundInputs
    {
        double a1 = 0.0, b1 = 0.0, c1 = 0.0;
        double d1 = 0.0, e1 = 0.0, f1 = 0.0;
        double d_nh = 0.0, d_nv = 0.0;
        double upsilon = 0.0; // |(d1, e1, f1)|
        double gamma = 0.0;   // |(2 a1 + d1, 2 b1 + e1, 2 c1 + f1)|
        double eta = 0.0;     // |(a1, b1, c1)|
        double tau_min = 0.0, tau_max = 1.0;
        double k_r = 1.0;
        double f = 1.0;
        double varsigma_los = 0.0;
        double delta_los = 0.0;

        // Fills the three norms from the components.
        static BoundInputs make(double a1, double b1, double c1, double d1, double e1, double f1, double d_nh,
                                double d_nv, double tau_min, double tau_max, double k_r, double f,
                                double varsigma_los, double delta_los);

        // Builds the inputs from a deployment and an explicit LoS path.
        static BoundInputs from_geometry(const Vec3 &velocity, double csi_delay, double t, int m, int ih, int iv,
                                         const UpaGeometry &bs, const FluidAntennaGeometry &fa, double tau_min,
                                         double tau_max, double k_r, double f, const Path &los);

        // Throws ConfigError when a norm disagrees with its components or the
        // delay window is empty.
        void validate() const;
    };

    // Random well-conditioned tuple for Monte Carlo checks. f * (tau_max - tau_min)
    // lies in [0.05, 1.5] so delay averaging does not wash out the delay terms.
    BoundInputs random_bound_inputs(Rng &rng);

    // Closed-form path averages over the uniform angle and delay laws.
    double expect_cos_g(const BoundInputs &in);          // g = (d1, e1, f1) . r_rx
    double expect_cos_a(const BoundInputs &in);          // a = (2 a1 + d1, 2 b1 + e1, 2 c1 + f1) . r_rx
    double expect_cos_b(const BoundInputs &in);          // b = 2 d_nh sin sin + 2 d_nv cos (BS phase)
    double expect_cos_k(const BoundInputs &in);          // k = 2 pi f tau - (delta_los + varsigma_los)
    double expect_sin_k(const BoundInputs &in);
    double expect_cos_delta_2varsigma(const BoundInputs &in);
    double expect_cos_delta(const BoundInputs &in);
    double expect_sin2_varsigma(const BoundInputs &in);

    // Limit of the LoS/NLoS cross term divided by sqrt(P1).
    double cross_term_los_nlos(const BoundInputs &in);
    // Limit of the NLoS/NLoS cross term divided by (P1 - 1).
    double cross_term_nlos_nlos(const BoundInputs &in);
    double non_cross_term(const BoundInputs &in);
    // (2 / (K + 1)) (1 - J0(eta + c1) J0(eta - c1)).
    double mse_upper_term(const BoundInputs &in);

    struct MseBounds
    {
        double lower = 0.0;
        double upper = 0.0;
        int regime = 1; // 1, 2 or 3 (boundary)
        double x = 0.0, y = 0.0, z = 0.0, u = 0.0;
    };

    // lambda_term and omega_term are finite-P values of the two cross sums.
    MseBounds mse_bounds(const BoundInputs &in, double lambda_term, double omega_term);

    // (K / (K + 1)) (2 - 2 cos(pi / rho)); an infinite k_r gives weight 1.
    double los_mse_bound(double rho, double k_r);

    enum class Term
    {
        cos_g,
        cos_a,
        cos_b,
        cos_k,
        sin_k,
        cos_delta_2varsigma,
        cos_delta,
        sin2_varsigma,
        sin_g,
        sin_a,
        sin_b,
        los_nlos_cross,  // assembled, per-path sample of Omega / sqrt(P1)
        nlos_nlos_cross, // assembled, per-pair sample of Lambda / (P1 - 1)
        non_cross        // assembled, per-path sample of the non-cross terms
    };

    // Parses names such as "cos_g" or "los_nlos_cross"; throws ConfigError.
    Term parse_term(const std::string &name);
    std::string term_name(Term t);
    // Closed-form value of a selector (zero for the sine terms that vanish).
    double closed_form(Term t, const BoundInputs &in);

    struct McResult
    {
        double mean = 0.0;
        double standard_error = 0.0;
    };

    McResult monte_carlo_expectation(Term term, const BoundInputs &in, std::size_t draws, Rng &rng);

    // Same estimator split into fixed-size chunks with per-chunk seeds, so the
    // result depends on the master seed only, not on the thread count.
    McResult monte_carlo_expectation(Term term, const BoundInputs &in, std::size_t draws, std::uint64_t seed,
                                     unsigned threads);

    // One NLoS path drawn from the uniform laws.
    struct PathDraw
    {
        double tau = 0.0;
        double eoa = 0.0, aoa = 0.0;
        double eod = 0.0, aod = 0.0;
    };

    std::vector<PathDraw> draw_paths(const BoundInputs &in, std::size_t count, Rng &rng);

    // Finite-P decomposition of the per-antenna error
    //   ||eps_n||^2 = 4 (xi + omega + lambda)
    // for a LoS path (taken from `in`) plus the given equal-power NLoS paths.
    struct FiniteTerms
    {
        double xi = 0.0;
        double omega = 0.0;
        double lambda = 0.0;
        double error = 0.0; // ||eps_n||^2
    };

    FiniteTerms finite_terms(const BoundInputs &in, const std::vector<PathDraw> &paths);
}

#endif
