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

#ifndef MPMP_LINKSIM_HPP
#define MPMP_LINKSIM_HPP

#include "mpmp/pencil.hpp"
#include "mpmp/port_selector.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mpmp
{
    enum class Method
    {
        mpmp,
        no_prediction,
        stationary,
        vec_prony
    };
    inline constexpr std::array<Method, 4> kAllMethods{Method::mpmp, Method::no_prediction, Method::stationary,
                                                       Method::vec_prony};
    std::string method_name(Method m);

    enum class VelocityMode
    {
        fa_axis,            // along -z, the fluid-antenna axis
        horizontal_random,  // uniform azimuth in the xy plane
        isotropic,          // uniform on the sphere
        explicit_vector     // fixed direction from the config
    };

    struct SimScenario
    {
        double carrier = 39e9;
        int n_ue = 8;
        UpaGeometry bs;
        FluidAntennaGeometry fa;
        double slot_duration = 0.5e-3;
        double csi_delay = 4e-3;
        std::vector<double> speeds{60.0 / 3.6, 120.0 / 3.6}; // m/s, cycled over UEs
        double ricean_k = 1.0;
        double delay_spread = 616e-9; // rms of the uniform delay law
        std::vector<double> snr_grid{0.0, 10.0, 20.0, 30.0};
        int n_drops = 50;
        std::uint64_t master_seed = 1;

        ScenarioSpec channel;           // cluster layout and optional path table; K, delays filled from above
        VelocityMode velocity_mode = VelocityMode::fa_axis;
        Vec3 velocity_direction{0.0, 0.0, -1.0};
        PencilConfig pencil;            // n_s, pencil sizes, ports, order rule
        int n_dl_slots = 8;
        std::optional<double> ul_snr_db; // defaults to each downlink SNR point
        bool selector_uses_truth = false;
        int prony_history = 16;
        int prony_order = 0; // 0: min(4, n_s / 2 - 1)
        double error_floor_db = -200.0;

        // Resolves defaults and checks invariants; throws ConfigError.
        void validate() const;
        int csi_delay_slots() const;
    };

    // Per-method, per-SNR metrics of one drop (or of an average of drops).
    struct DropMetrics
    {
        // se[method][snr] in bits/s/Hz, averaged over downlink slots.
        std::array<std::vector<double>, 4> se;
        // Linear prediction error averaged over UEs and slots, per method and SNR.
        std::array<std::vector<double>, 4> pred_error;
        // Error of the MPMP effective channel itself against the reference.
        std::vector<double> mpmp_true_error;
        int estimation_failures = 0;
        int regularized_precoders = 0;
        int regularized_prony = 0;
        int off_window_estimates = 0;
    };

    struct PrecoderResult
    {
        CMat w; // N_t x N_UE, unit-norm columns
        bool regularized = false;
    };

    // Zero-forcing with unit-norm columns; channels has one row per UE.
    PrecoderResult ezf_precode(const CMat &channels);

    // Sum over UEs of log2(1 + SINR_u); true_channels has one row per UE.
    double sinr_se(const CMat &precoder, const CMat &true_channels, double noise_power);
    std::vector<double> sinr_per_ue(const CMat &precoder, const CMat &true_channels, double noise_power);

    // 10 log10(||predicted - truth||^2 / ||truth||^2), floored.
    double prediction_error_db(const CVec &predicted, const CVec &truth, double floor_db = -200.0);
    double linear_to_db(double ratio, double floor_db = -200.0);

    struct PronyPrediction
    {
        CVec values;
        bool regularized = false;
    };

    // Shared-coefficient linear prediction fitted on history (oldest first) and
    // iterated `horizon` steps past the last sample.
    PronyPrediction vec_prony_predict(const std::vector<CVec> &history, int order, int horizon);

    // Channel of UE u in the drop seeded by drop_seed, as run_drop draws it.
    PathSet ue_path_set(const SimScenario &sc, std::uint64_t drop_seed, int u);

    DropMetrics run_drop(const SimScenario &sc, std::uint64_t drop_seed, unsigned threads = 1);

    struct SimSummary
    {
        std::vector<DropMetrics> drops;
        DropMetrics mean;                          // drop average
        std::array<std::vector<double>, 4> se_ci;  // 95% half-width of the drop mean
        int estimation_failures = 0;
    };

    // Drop d uses derive_seed(master_seed, "drop", d); results do not depend
    // on the thread count.
    SimSummary run_simulation(const SimScenario &sc, unsigned threads = 1);
}

#endif
