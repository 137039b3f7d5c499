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

#ifndef MPMP_PENCIL_HPP
#define MPMP_PENCIL_HPP

#include "mpmp/channel.hpp"

#include <vector>

namespace mpmp
{
    enum class OrderRule
    {
        relative,   // sigma_k / sigma_1 > rank_threshold
        noise_edge, // sigma_k above the known noise singular-value edge
        mdl         // minimum description length on the squared spectrum
    };

    struct PencilConfig
    {
        int n_s = 16;                  // total samples N_s, even
        double sample_interval = 0.5e-3;
        int pencil_l = 0;              // 0: round(N_s / 3) clamped to [2, N_s/2 - 1]
        int pencil_r = 0;              // 0: ceil(N_v / 2)
        int delta1 = 1;
        int delta2 = 0;                // 0: delta1 + max(1, floor(0.4 rho))
        double rank_threshold = 1e-3;
        OrderRule order_rule = OrderRule::relative;
        double noise_var = 0.0;        // per-element noise variance for noise_edge
        double noise_edge_factor = 1.5;
        int max_order = 0;             // 0: limited by the pencil dimensions only
        double unit_circle_tol = 1e-3; // eigenvalue modulus deviation that raises a warning flag
        double wavelength = 0.0;       // filled from the fluid antenna by resolved()
        bool stack_columns = true;     // use every array column in the pencil matrix, not just the first

        int half() const { return n_s / 2; }
        // Copy with every defaulted field filled in and validated.
        PencilConfig resolved(const UpaGeometry &bs, const FluidAntennaGeometry &fa) const;
        void validate(const UpaGeometry &bs, const FluidAntennaGeometry &fa) const;
    };

    // Uplink observations: n_s/2 full-array snapshots at port delta1 (times
    // T .. (n_s/2) T) followed by n_s/2 at port delta2 (times (n_s/2 + 1) T .. n_s T).
    struct UplinkSamples
    {
        std::vector<CVec> first;
        std::vector<CVec> last;
    };

    UplinkSamples collect_uplink_samples(const std::vector<Ray> &rays, const UpaGeometry &bs,
                                         const FluidAntennaGeometry &fa, const PencilConfig &cfg, double sigma2,
                                         Rng &rng);

    struct RawEstimates
    {
        std::vector<double> omega_hat;       // hertz
        std::vector<double> chi_theta_hat;   // meters
        std::vector<cplx> c_delta1_hat;      // first half, first column amplitudes
        std::vector<cplx> kappa_hat;         // first half, second column amplitudes
        std::vector<cplx> varpi_delta2_hat;  // last half, first column amplitudes
        int p_hat = 0;

        std::vector<cplx> z_time;            // unit-modulus time-shift eigenvalues
        std::vector<cplx> z_ant;             // unit-modulus antenna-shift eigenvalues
        RVec singular_values;
        double max_circle_deviation = 0.0;   // max | |z| - 1 | before projection
        bool off_circle_warning = false;
    };

    struct EstimatedPath
    {
        double doppler = 0.0;
        double eod = 0.0;
        double aod = 0.0;
        double eoa = 0.0;
        cplx gain;
    };

    struct EstimatedModel
    {
        std::vector<EstimatedPath> paths;
        int path_count() const { return static_cast<int>(paths.size()); }
        std::vector<Ray> rays() const;
    };

    enum class Half
    {
        first,
        last
    };

    // Hankel matrix H(i, k) = samples[i + k], i < l, k < mu1 = len - l + 1.
    CMat build_hankel_1d(const CVec &samples, int l);
    CMat build_hankel_1d(const CVec &samples, int l, int mu1);

    // Block-Hankel stacking B(i, k) = blocks[i + k], i < r.
    CMat build_block_2d(const std::vector<CMat> &blocks, int r);

    int estimate_model_order(const RVec &singular_values, double threshold);
    int estimate_model_order_noise(const RVec &singular_values, double noise_var, double factor, Eigen::Index rows,
                                   Eigen::Index cols);
    int estimate_model_order_mdl(const RVec &singular_values, Eigen::Index snapshots);

    // One half-window estimate from snapshots (full arrays) of that half.
    // forced_order > 0 bypasses model-order selection.
    RawEstimates estimate_half(const std::vector<CVec> &snapshots, const UpaGeometry &bs, const PencilConfig &cfg,
                               Half which, int forced_order = 0);

    // perm[p] = index in `last` matched to path p of `first`.
    std::vector<int> pair_dopplers(const RawEstimates &first, const RawEstimates &last);

    EstimatedModel recover_angles(const RawEstimates &first, const RawEstimates &last, const std::vector<int> &perm,
                                  const UpaGeometry &bs, const FluidAntennaGeometry &fa, const PencilConfig &cfg);

    struct EstimationResult
    {
        EstimatedModel model;
        RawEstimates first;
        RawEstimates last;
        std::vector<int> perm;
        bool pencil_window_ok = true; // p_hat + 1 < L < n_s/2 - p_hat + 2
    };

    // Full pipeline: both halves, pairing and angle recovery.
    EstimationResult estimate_model(const UplinkSamples &samples, const UpaGeometry &bs,
                                    const FluidAntennaGeometry &fa, const PencilConfig &cfg);

    ChannelSnapshot reconstruct_channel(const EstimatedModel &model, const UpaGeometry &bs,
                                        const FluidAntennaGeometry &fa, double t, int m);
}

#endif
