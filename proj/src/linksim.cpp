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

#include "mpmp/linksim.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <string>

namespace mpmp
{
    std::string method_name(Method m)
    {
        switch (m)
        {
        case Method::mpmp:
            return "mpmp";
        case Method::no_prediction:
            return "no_prediction";
        case Method::stationary:
            return "stationary";
        case Method::vec_prony:
            return "vec_prony";
        }
        return "unknown";
    }

    int SimScenario::csi_delay_slots() const
    {
        return static_cast<int>(round_half_away(csi_delay / slot_duration));
    }

    void SimScenario::validate() const
    {
        if (!(carrier > 0.0))
            throw ConfigError("carrier frequency must be positive");
        if (n_ue < 1)
            throw ConfigError("n_ue must be >= 1");
        bs.validate();
        fa.validate();
        if (!(slot_duration > 0.0))
            throw ConfigError("slot duration must be positive");
        if (!(csi_delay > 0.0))
            throw ConfigError("csi delay must be positive");
        const double ratio = csi_delay / slot_duration;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
            throw ConfigError("csi delay must be an integer multiple of the slot duration");
        if (speeds.empty())
            throw ConfigError("speeds must not be empty");
        for (double v : speeds)
            if (!(v >= 0.0))
                throw ConfigError("speeds must be >= 0");
        if (ricean_k < 0.0)
            throw ConfigError("ricean_k must be >= 0");
        if (!(delay_spread >= 0.0))
            throw ConfigError("delay spread must be >= 0");
        if (snr_grid.empty())
            throw ConfigError("snr grid must not be empty");
        if (n_drops < 1)
            throw ConfigError("n_drops must be >= 1");
        if (n_dl_slots < 1)
            throw ConfigError("n_dl_slots must be >= 1");
        if (velocity_mode == VelocityMode::explicit_vector && !(velocity_direction.norm() > 0.0))
            throw ConfigError("explicit velocity direction must be nonzero");
        PencilConfig pc = pencil;
        pc.sample_interval = slot_duration;
        pc.resolved(bs, fa);
        const int order = prony_order > 0 ? prony_order : std::min(4, pencil.n_s / 2 - 1);
        if (prony_history <= order)
            throw ConfigError("prony history must exceed the prediction order");
    }

    PrecoderResult ezf_precode(const CMat &h)
    {
        if (h.rows() < 1 || h.cols() < h.rows())
            throw std::invalid_argument("ezf_precode: need 1 <= N_UE <= N_t");
        CMat g = h * h.adjoint();
        PrecoderResult r;
        Eigen::FullPivLU<CMat> lu(g);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible())
        {
            r.regularized = true;
            const double load = 1e-10 * g.trace().real();
            g += CMat::Identity(g.rows(), g.cols()) * cplx(load > 0.0 ? load : 1e-300, 0.0);
        }
        // W = H^H G^{-1} = (G^{-1} H)^H since G is Hermitian.
        r.w = Eigen::PartialPivLU<CMat>(g).solve(h).adjoint();
        for (Eigen::Index u = 0; u < r.w.cols(); ++u)
        {
            const double n = r.w.col(u).norm();
            if (n > 0.0)
                r.w.col(u) /= n;
        }
        return r;
    }

    std::vector<double> sinr_per_ue(const CMat &w, const CMat &h, double noise_power)
    {
        if (w.rows() != h.cols() || w.cols() != h.rows())
            throw std::invalid_argument("sinr_se: precoder and channel shapes differ");
        const CMat hw = h * w;
        std::vector<double> out;
        for (Eigen::Index u = 0; u < h.rows(); ++u)
        {
            const double sig = std::norm(hw(u, u));
            double intf = 0.0;
            for (Eigen::Index v = 0; v < hw.cols(); ++v)
                if (v != u)
                    intf += std::norm(hw(u, v));
            out.push_back(sig / (intf + noise_power));
        }
        return out;
    }

    double sinr_se(const CMat &w, const CMat &h, double noise_power)
    {
        double se = 0.0;
        for (double s : sinr_per_ue(w, h, noise_power))
            se += std::log2(1.0 + s);
        return se;
    }

    double linear_to_db(double ratio, double floor_db)
    {
        if (!(ratio > 0.0))
            return floor_db;
        return std::max(floor_db, 10.0 * std::log10(ratio));
    }

    double prediction_error_db(const CVec &predicted, const CVec &truth, double floor_db)
    {
        if (predicted.size() != truth.size())
            throw std::invalid_argument("prediction_error_db: length mismatch");
        const double den = truth.squaredNorm();
        if (!(den > 0.0))
            throw std::invalid_argument("prediction_error_db: zero-norm truth");
        return linear_to_db((predicted - truth).squaredNorm() / den, floor_db);
    }

    PronyPrediction vec_prony_predict(const std::vector<CVec> &history, int order, int horizon)
    {
        const int len = static_cast<int>(history.size());
        if (order < 1 || len <= order)
            throw std::invalid_argument("vec_prony_predict: history must be longer than the order");
        if (horizon < 0)
            throw std::invalid_argument("vec_prony_predict: negative horizon");
        const Eigen::Index n = history[0].size();
        for (const auto &h : history)
            if (h.size() != n)
                throw std::invalid_argument("vec_prony_predict: inconsistent snapshot lengths");

        // Stacked system over antennas: h[k] = sum_i a_i h[k - i].
        const Eigen::Index rows = n * (len - order);
        CMat A(rows, order);
        CVec b(rows);
        Eigen::Index r = 0;
        for (int k = order; k < len; ++k)
            for (Eigen::Index a = 0; a < n; ++a, ++r)
            {
                b(r) = history[std::size_t(k)](a);
                for (int i = 1; i <= order; ++i)
                    A(r, i - 1) = history[std::size_t(k - i)](a);
            }
        CMat g = A.adjoint() * A;
        CVec rhs = A.adjoint() * b;
        PronyPrediction out;
        Eigen::JacobiSVD<CMat> svd(g);
        const RVec sv = svd.singularValues();
        if (!(sv(0) > 0.0) || sv(sv.size() - 1) < 1e-10 * sv(0))
        {
            out.regularized = true;
            const double load = 1e-8 * std::max(g.trace().real() / order, 1e-300);
            g += CMat::Identity(order, order) * cplx(load, 0.0);
        }
        const CVec coef = g.ldlt().solve(rhs);

        std::vector<CVec> buf(history.end() - order, history.end());
        for (int s = 0; s < horizon; ++s)
        {
            CVec next = CVec::Zero(n);
            for (int i = 1; i <= order; ++i)
                next += coef(i - 1) * buf[buf.size() - std::size_t(i)];
            buf.erase(buf.begin());
            buf.push_back(std::move(next));
        }
        out.values = buf.back();
        return out;
    }

    namespace
    {
        struct SlotTrace
        {
            std::array<CVec, 4> csi;
            std::array<CVec, 4> eff;
            std::array<double, 4> err{};
            double mpmp_true = 0.0;
        };

        struct UeTrace
        {
            // [snr][slot]
            std::vector<std::vector<SlotTrace>> slots;
            int failures = 0;
            int prony_regularized = 0;
            int off_window = 0;
        };

        Vec3 draw_direction(const SimScenario &sc, Rng &rng)
        {
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            switch (sc.velocity_mode)
            {
            case VelocityMode::fa_axis:
                return Vec3(0.0, 0.0, -1.0);
            case VelocityMode::horizontal_random:
            {
                const double az = kPi - 2.0 * kPi * u01(rng);
                return Vec3(std::cos(az), std::sin(az), 0.0);
            }
            case VelocityMode::isotropic:
            {
                const double z = 1.0 - 2.0 * u01(rng);
                const double az = kPi - 2.0 * kPi * u01(rng);
                const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
                return Vec3(s * std::cos(az), s * std::sin(az), z);
            }
            case VelocityMode::explicit_vector:
                return sc.velocity_direction.normalized();
            }
            return Vec3(0.0, 0.0, -1.0);
        }

    }

    PathSet ue_path_set(const SimScenario &sc, std::uint64_t drop_seed, int u)
    {
        Rng rng(derive_seed(drop_seed, "ue", std::uint64_t(u)));
        const double speed = sc.speeds[std::size_t(u) % sc.speeds.size()];
        const Vec3 velocity = speed * draw_direction(sc, rng);

        ScenarioSpec spec = sc.channel;
        spec.carrier_freq = sc.carrier;
        spec.ricean_k = sc.ricean_k;
        spec.tau_max = spec.tau_min + sc.delay_spread * std::sqrt(12.0);
        return generate_scenario(spec, velocity, rng);
    }

    namespace
    {
        int idx(Method m) { return static_cast<int>(m); }

        double rel_err(const CVec &a, const CVec &truth)
        {
            return (a - truth).squaredNorm() / truth.squaredNorm();
        }

        UeTrace run_ue(const SimScenario &sc, std::uint64_t drop_seed, int u)
        {
            const PathSet ps = ue_path_set(sc, drop_seed, u);
            const std::vector<Ray> truth = to_rays(ps);
            const CMat a_true = steering_matrix(truth, sc.bs, sc.fa.wavelength);
            const double drx = sc.fa.port_spacing();
            const double lambda = sc.fa.wavelength;
            auto h_true = [&](double t, int m) { return evaluate_rays(truth, a_true, drx, lambda, t, m); };

            PencilConfig pc = sc.pencil;
            pc.sample_interval = sc.slot_duration;
            pc = pc.resolved(sc.bs, sc.fa);
            const double T = sc.slot_duration;
            const double tau = sc.csi_delay;
            const int horizon = sc.csi_delay_slots();
            const int order = sc.prony_order > 0 ? sc.prony_order : std::min(4, pc.n_s / 2 - 1);

            UeTrace trace;
            trace.slots.resize(sc.snr_grid.size());
            for (std::size_t s = 0; s < sc.snr_grid.size(); ++s)
            {
                const double ul_snr = sc.ul_snr_db.value_or(sc.snr_grid[s]);
                const double sigma2 = std::pow(10.0, -ul_snr / 10.0);
                Rng noise(derive_seed(drop_seed, "ul", std::uint64_t(u) * sc.snr_grid.size() + s));

                PencilConfig est_cfg = pc;
                if (est_cfg.order_rule == OrderRule::noise_edge)
                {
                    if (sigma2 > 0.0)
                        est_cfg.noise_var = sigma2;
                    else
                        est_cfg.order_rule = OrderRule::relative;
                }
                UplinkSamples samples = collect_uplink_samples(truth, sc.bs, sc.fa, est_cfg, sigma2, noise);

                bool ok = true;
                EstimatedModel model;
                try
                {
                    EstimationResult er = estimate_model(samples, sc.bs, sc.fa, est_cfg);
                    model = std::move(er.model);
                    if (!er.pencil_window_ok)
                        trace.off_window++;
                }
                catch (const std::exception &)
                {
                    ok = false;
                    trace.failures++;
                }
                const std::vector<Ray> est = ok ? model.rays() : std::vector<Ray>{};
                const std::vector<Ray> &sel_rays = sc.selector_uses_truth ? truth : est;
                const CMat a_est = ok ? steering_matrix(est, sc.bs, lambda) : CMat();

                // Noisy port-1 observations from the first Prony history sample
                // through the last downlink slot, in time order.
                const int k_first = pc.n_s + 1 - (sc.prony_history - 1);
                const int k_last = pc.n_s + sc.n_dl_slots;
                std::map<int, CVec> obs;
                for (int k = k_first; k <= k_last; ++k)
                {
                    CVec y = h_true(k * T, 1);
                    if (sigma2 > 0.0)
                        for (Eigen::Index n = 0; n < y.size(); ++n)
                            y(n) += complex_normal(noise, sigma2);
                    obs[k] = std::move(y);
                }

                for (int j = 1; j <= sc.n_dl_slots; ++j)
                {
                    const int kj = pc.n_s + j;
                    const double t = kj * T;
                    SlotTrace st;
                    const CVec h_now = h_true(t, 1);
                    const CVec h_late = h_true(t + tau, 1);
                    const CVec &y = obs.at(kj);

                    st.csi[idx(Method::stationary)] = y;
                    st.eff[idx(Method::stationary)] = h_now;
                    st.err[idx(Method::stationary)] = rel_err(y, h_now);

                    st.csi[idx(Method::no_prediction)] = y;
                    st.eff[idx(Method::no_prediction)] = h_late;
                    st.err[idx(Method::no_prediction)] = rel_err(y, h_late);

                    std::vector<CVec> hist;
                    for (int k = kj - sc.prony_history + 1; k <= kj; ++k)
                        hist.push_back(obs.at(k));
                    PronyPrediction pp = vec_prony_predict(hist, order, horizon);
                    if (pp.regularized)
                        trace.prony_regularized++;
                    st.csi[idx(Method::vec_prony)] = pp.values;
                    st.eff[idx(Method::vec_prony)] = h_late;
                    st.err[idx(Method::vec_prony)] = rel_err(pp.values, h_late);

                    st.csi[idx(Method::mpmp)] = y;
                    if (ok && !sel_rays.empty())
                    {
                        int port = 1;
                        if (sel_rays.size() == 1)
                        {
                            try
                            {
                                port = select_port_los(sel_rays[0], sc.fa, tau).port;
                            }
                            catch (const NumericalError &)
                            {
                                port = 1;
                            }
                        }
                        else
                        {
                            port = select_port_multipath(ErrorFunctional(sel_rays, sc.bs, sc.fa, t, tau));
                        }
                        const CVec moved = h_true(t + tau, port);
                        const CVec recon = evaluate_rays(est, a_est, drx, lambda, t + tau, port);
                        st.eff[idx(Method::mpmp)] = moved;
                        st.err[idx(Method::mpmp)] = rel_err(recon, h_now);
                        st.mpmp_true = rel_err(moved, h_now);
                    }
                    else
                    {
                        st.eff[idx(Method::mpmp)] = h_late;
                        st.err[idx(Method::mpmp)] = st.err[idx(Method::no_prediction)];
                        st.mpmp_true = rel_err(h_late, h_now);
                    }
                    trace.slots[s].push_back(std::move(st));
                }
            }
            return trace;
        }

        DropMetrics combine(const SimScenario &sc, const std::vector<UeTrace> &ues)
        {
            const std::size_t ns = sc.snr_grid.size();
            DropMetrics dm;
            for (auto &v : dm.se)
                v.assign(ns, 0.0);
            for (auto &v : dm.pred_error)
                v.assign(ns, 0.0);
            dm.mpmp_true_error.assign(ns, 0.0);
            for (const auto &ue : ues)
            {
                dm.estimation_failures += ue.failures;
                dm.regularized_prony += ue.prony_regularized;
                dm.off_window_estimates += ue.off_window;
            }
            const Eigen::Index nt = sc.bs.n_t();
            const double count = double(ues.size()) * sc.n_dl_slots;
            for (std::size_t s = 0; s < ns; ++s)
            {
                const double n0 = std::pow(10.0, -sc.snr_grid[s] / 10.0);
                for (int j = 0; j < sc.n_dl_slots; ++j)
                {
                    for (Method m : kAllMethods)
                    {
                        CMat hc(Eigen::Index(ues.size()), nt), he(Eigen::Index(ues.size()), nt);
                        for (std::size_t u = 0; u < ues.size(); ++u)
                        {
                            const SlotTrace &st = ues[u].slots[s][std::size_t(j)];
                            hc.row(Eigen::Index(u)) = st.csi[idx(m)].transpose();
                            he.row(Eigen::Index(u)) = st.eff[idx(m)].transpose();
                        }
                        PrecoderResult pr = ezf_precode(hc);
                        if (pr.regularized)
                            dm.regularized_precoders++;
                        dm.se[idx(m)][s] += sinr_se(pr.w, he, n0) / sc.n_dl_slots;
                    }
                    for (std::size_t u = 0; u < ues.size(); ++u)
                    {
                        const SlotTrace &st = ues[u].slots[s][std::size_t(j)];
                        for (Method m : kAllMethods)
                            dm.pred_error[idx(m)][s] += st.err[idx(m)] / count;
                        dm.mpmp_true_error[s] += st.mpmp_true / count;
                    }
                }
            }
            return dm;
        }
    }

    DropMetrics run_drop(const SimScenario &sc, std::uint64_t drop_seed, unsigned threads)
    {
        sc.validate();
        std::vector<UeTrace> ues(std::size_t(sc.n_ue));
        parallel_for(ues.size(), threads, [&](std::size_t u) { ues[u] = run_ue(sc, drop_seed, int(u)); });
        return combine(sc, ues);
    }

    SimSummary run_simulation(const SimScenario &sc, unsigned threads)
    {
        sc.validate();
        const std::size_t nd = std::size_t(sc.n_drops), nu = std::size_t(sc.n_ue);
        SimSummary out;
        out.drops.resize(nd);
        // Drops are processed in batches so memory stays bounded for long runs.
        const std::size_t batch = std::max<std::size_t>(1, resolve_threads(threads));
        for (std::size_t d0 = 0; d0 < nd; d0 += batch)
        {
            const std::size_t d1 = std::min(nd, d0 + batch);
            std::vector<UeTrace> traces((d1 - d0) * nu);
            parallel_for(traces.size(), threads,
                         [&](std::size_t i)
                         {
                             const std::size_t d = d0 + i / nu;
                             traces[i] = run_ue(sc, derive_seed(sc.master_seed, "drop", d), int(i % nu));
                         });
            parallel_for(d1 - d0, threads,
                         [&](std::size_t k)
                         {
                             std::vector<UeTrace> ues(traces.begin() + std::ptrdiff_t(k * nu),
                                                      traces.begin() + std::ptrdiff_t((k + 1) * nu));
                             out.drops[d0 + k] = combine(sc, ues);
                         });
        }

        const std::size_t ns = sc.snr_grid.size();
        DropMetrics &mean = out.mean;
        for (auto &v : mean.se)
            v.assign(ns, 0.0);
        for (auto &v : mean.pred_error)
            v.assign(ns, 0.0);
        for (auto &v : out.se_ci)
            v.assign(ns, 0.0);
        mean.mpmp_true_error.assign(ns, 0.0);
        for (const auto &dm : out.drops)
        {
            for (int m = 0; m < 4; ++m)
                for (std::size_t s = 0; s < ns; ++s)
                {
                    mean.se[std::size_t(m)][s] += dm.se[std::size_t(m)][s] / double(nd);
                    mean.pred_error[std::size_t(m)][s] += dm.pred_error[std::size_t(m)][s] / double(nd);
                }
            for (std::size_t s = 0; s < ns; ++s)
                mean.mpmp_true_error[s] += dm.mpmp_true_error[s] / double(nd);
            mean.estimation_failures += dm.estimation_failures;
            mean.regularized_precoders += dm.regularized_precoders;
            mean.regularized_prony += dm.regularized_prony;
            mean.off_window_estimates += dm.off_window_estimates;
        }
        out.estimation_failures = mean.estimation_failures;
        if (nd > 1)
        {
            for (int m = 0; m < 4; ++m)
                for (std::size_t s = 0; s < ns; ++s)
                {
                    double var = 0.0;
                    for (const auto &dm : out.drops)
                    {
                        const double e = dm.se[std::size_t(m)][s] - mean.se[std::size_t(m)][s];
                        var += e * e;
                    }
                    var /= double(nd - 1);
                    out.se_ci[std::size_t(m)][s] = 1.96 * std::sqrt(var / double(nd));
                }
        }
        return out;
    }
}
