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

#include "mpmp/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace mpmp
{
    namespace
    {
        // Weight of the antenna pencil in the joint eigenproblem; any irrational
        // value avoids accidental eigenvalue collisions between the two pencils.
        constexpr double kJointWeight = 0.6180339887498949;

        int default_l(int n_s)
        {
            int half = n_s / 2;
            int l = static_cast<int>(round_half_away(n_s / 3.0));
            return std::clamp(l, 2, std::max(2, half - 1));
        }
    }

    PencilConfig PencilConfig::resolved(const UpaGeometry &bs, const FluidAntennaGeometry &fa) const
    {
        PencilConfig c = *this;
        c.wavelength = fa.wavelength;
        if (c.pencil_l <= 0)
            c.pencil_l = default_l(c.n_s);
        if (c.pencil_r <= 0)
            c.pencil_r = (bs.n_v + 1) / 2;
        if (c.delta2 <= 0)
        {
            int step = std::max(1, static_cast<int>(std::floor(0.4 * fa.port_density())));
            c.delta2 = c.delta1 + step;
            if (c.delta2 > fa.m_ports)
                c.delta2 = fa.m_ports;
        }
        c.validate(bs, fa);
        return c;
    }

    void PencilConfig::validate(const UpaGeometry &bs, const FluidAntennaGeometry &fa) const
    {
        if (n_s < 4 || n_s % 2 != 0)
            throw ConfigError("estimator.n_s must be even and >= 4, got " + std::to_string(n_s));
        if (!(sample_interval > 0.0))
            throw ConfigError("sample interval must be positive");
        int mu1 = half() - pencil_l + 1;
        if (pencil_l < 2 || mu1 < 1)
            throw ConfigError("estimator.l must satisfy 2 <= L <= n_s/2, got " + std::to_string(pencil_l));
        if (pencil_r < 1 || pencil_r > bs.n_v)
            throw ConfigError("estimator.r must satisfy 1 <= R <= n_v, got " + std::to_string(pencil_r));
        if (delta1 < 1 || delta1 > fa.m_ports || delta2 < 1 || delta2 > fa.m_ports)
            throw ConfigError("estimator.delta1/delta2 must lie in [1, M]");
        if (delta1 == delta2)
            throw ConfigError("estimator.delta1 and delta2 must differ");
        if (rank_threshold < 0.0)
            throw ConfigError("estimator.rank_threshold must be >= 0");
        if (!(wavelength > 0.0))
            throw ConfigError("pencil config has no wavelength (resolve it against the fluid antenna)");
    }

    UplinkSamples collect_uplink_samples(const std::vector<Ray> &rays, const UpaGeometry &bs,
                                         const FluidAntennaGeometry &fa, const PencilConfig &cfg, double sigma2,
                                         Rng &rng)
    {
        const PencilConfig c = cfg.resolved(bs, fa);
        CMat A = steering_matrix(rays, bs, fa.wavelength);
        UplinkSamples s;
        const int h = c.half();
        const double T = c.sample_interval;
        for (int k = 1; k <= 2 * h; ++k)
        {
            int port = k <= h ? c.delta1 : c.delta2;
            CVec y = evaluate_rays(rays, A, fa.port_spacing(), fa.wavelength, k * T, port);
            if (sigma2 > 0.0)
                for (Eigen::Index n = 0; n < y.size(); ++n)
                    y(n) += complex_normal(rng, sigma2);
            (k <= h ? s.first : s.last).push_back(std::move(y));
        }
        return s;
    }

    std::vector<Ray> EstimatedModel::rays() const
    {
        std::vector<Ray> r;
        r.reserve(paths.size());
        for (const auto &p : paths)
            r.push_back(Ray{p.gain, p.doppler, p.eod, p.aod, p.eoa});
        return r;
    }

    CMat build_hankel_1d(const CVec &samples, int l)
    {
        return build_hankel_1d(samples, l, static_cast<int>(samples.size()) - l + 1);
    }

    CMat build_hankel_1d(const CVec &samples, int l, int mu1)
    {
        if (l < 1 || mu1 < 1 || samples.size() < l + mu1 - 1)
            throw std::invalid_argument("build_hankel_1d: sequence too short for the requested pencil");
        CMat H(l, mu1);
        for (int i = 0; i < l; ++i)
            for (int k = 0; k < mu1; ++k)
                H(i, k) = samples(i + k);
        return H;
    }

    CMat build_block_2d(const std::vector<CMat> &blocks, int r)
    {
        if (blocks.empty())
            throw std::invalid_argument("build_block_2d: no blocks");
        const int nv = static_cast<int>(blocks.size());
        const int mu2 = nv - r + 1;
        if (r < 1 || mu2 < 1)
            throw std::invalid_argument("build_block_2d: pencil size out of range");
        const Eigen::Index L = blocks[0].rows(), mu1 = blocks[0].cols();
        for (const auto &b : blocks)
            if (b.rows() != L || b.cols() != mu1)
                throw std::invalid_argument("build_block_2d: inconsistent block shapes");
        CMat D(r * L, mu2 * mu1);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < mu2; ++k)
                D.block(i * L, k * mu1, L, mu1) = blocks[static_cast<std::size_t>(i + k)];
        return D;
    }

    int estimate_model_order(const RVec &sv, double threshold)
    {
        if (sv.size() == 0)
            throw std::invalid_argument("estimate_model_order: empty spectrum");
        if (!(sv(0) > 0.0))
            throw NumericalError("estimate_model_order: all-zero spectrum");
        int count = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) / sv(0) > threshold)
                ++count;
        return std::max(1, count);
    }

    int estimate_model_order_noise(const RVec &sv, double noise_var, double factor, Eigen::Index rows,
                                   Eigen::Index cols)
    {
        if (sv.size() == 0 || !(sv(0) > 0.0))
            throw NumericalError("estimate_model_order: all-zero spectrum");
        const double edge = factor * std::sqrt(noise_var) * (std::sqrt(double(rows)) + std::sqrt(double(cols)));
        int count = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > edge)
                ++count;
        return std::max(1, count);
    }

    int estimate_model_order_mdl(const RVec &sv, Eigen::Index snapshots)
    {
        if (sv.size() == 0 || !(sv(0) > 0.0))
            throw NumericalError("estimate_model_order: all-zero spectrum");
        const Eigen::Index p = sv.size();
        const double n = static_cast<double>(snapshots);
        double best = std::numeric_limits<double>::infinity();
        int best_k = 1;
        for (Eigen::Index k = 0; k + 1 < p; ++k)
        {
            const Eigen::Index tail = p - k;
            double log_geo = 0.0, arith = 0.0;
            for (Eigen::Index i = k; i < p; ++i)
            {
                double l2 = std::max(sv(i) * sv(i), std::numeric_limits<double>::min());
                log_geo += std::log(l2);
                arith += l2;
            }
            log_geo /= double(tail);
            arith /= double(tail);
            double mdl = -n * double(tail) * (log_geo - std::log(arith)) + 0.5 * double(k) * double(2 * p - k) * std::log(n);
            if (mdl < best)
            {
                best = mdl;
                best_k = static_cast<int>(k);
            }
        }
        return std::max(1, best_k);
    }

    namespace
    {
        // Extracts antenna column `col` (fixed n_h) as an n_v x K matrix.
        CMat column_samples(const std::vector<CVec> &snapshots, const UpaGeometry &bs, int col)
        {
            const int K = static_cast<int>(snapshots.size());
            CMat S(bs.n_v, K);
            for (int k = 0; k < K; ++k)
            {
                if (snapshots[static_cast<std::size_t>(k)].size() != bs.n_t())
                    throw std::invalid_argument("estimate_half: snapshot length differs from N_t");
                for (int iv = 0; iv < bs.n_v; ++iv)
                    S(iv, k) = snapshots[static_cast<std::size_t>(k)](bs.index(col, iv));
            }
            return S;
        }

        // Least-squares amplitudes of S(iv, k) = sum_p c_p za_p^iv zt_p^(k + 1).
        std::vector<cplx> vandermonde_amplitudes(const CMat &S, const std::vector<cplx> &zt,
                                                 const std::vector<cplx> &za)
        {
            const Eigen::Index nv = S.rows(), K = S.cols();
            const Eigen::Index P = static_cast<Eigen::Index>(zt.size());
            CMat V(nv * K, P);
            CVec y(nv * K);
            for (Eigen::Index p = 0; p < P; ++p)
            {
                for (Eigen::Index iv = 0; iv < nv; ++iv)
                {
                    cplx a = std::pow(za[static_cast<std::size_t>(p)], static_cast<double>(iv));
                    for (Eigen::Index k = 0; k < K; ++k)
                        V(iv * K + k, p) = a * std::pow(zt[static_cast<std::size_t>(p)], static_cast<double>(k + 1));
                }
            }
            for (Eigen::Index iv = 0; iv < nv; ++iv)
                for (Eigen::Index k = 0; k < K; ++k)
                    y(iv * K + k) = S(iv, k);
            CVec c = V.colPivHouseholderQr().solve(y);
            return std::vector<cplx>(c.data(), c.data() + c.size());
        }
    }

    RawEstimates estimate_half(const std::vector<CVec> &snapshots, const UpaGeometry &bs, const PencilConfig &cfg,
                               Half which, int forced_order)
    {
        (void)which; // both halves share the local time origin k = 1
        const int K = static_cast<int>(snapshots.size());
        const int L = cfg.pencil_l, R = cfg.pencil_r;
        if (K != cfg.half())
            throw std::invalid_argument("estimate_half: expected n_s/2 snapshots");
        if (L < 2 || K - L + 1 < 1 || R < 1 || R > bs.n_v)
            throw std::invalid_argument("estimate_half: pencil sizes out of range (resolve the config first)");

        CMat S = column_samples(snapshots, bs, 0);
        auto column_matrix = [&](const CMat &cs)
        {
            std::vector<CMat> blocks;
            for (int iv = 0; iv < bs.n_v; ++iv)
                blocks.push_back(build_hankel_1d(cs.row(iv).transpose(), L));
            return build_block_2d(blocks, R);
        };
        // Every array column spans the same time/vertical signal subspace, so
        // stacking them side by side adds snapshots without breaking the
        // shift structure.
        const int columns = cfg.stack_columns ? bs.n_h : 1;
        CMat D0 = column_matrix(S);
        CMat D(D0.rows(), D0.cols() * columns);
        D.leftCols(D0.cols()) = D0;
        for (int ih = 1; ih < columns; ++ih)
            D.middleCols(ih * D0.cols(), D0.cols()) = column_matrix(column_samples(snapshots, bs, ih));

        Eigen::BDCSVD<CMat> svd(D, Eigen::ComputeThinU);
        RawEstimates out;
        out.singular_values = svd.singularValues();

        int P = forced_order;
        if (P <= 0)
        {
            switch (cfg.order_rule)
            {
            case OrderRule::relative:
                P = estimate_model_order(out.singular_values, cfg.rank_threshold);
                break;
            case OrderRule::noise_edge:
                P = estimate_model_order_noise(out.singular_values, cfg.noise_var, cfg.noise_edge_factor, D.rows(),
                                               D.cols());
                break;
            case OrderRule::mdl:
                P = estimate_model_order_mdl(out.singular_values, D.cols());
                break;
            }
        }
        // The shifted sub-bases must keep full column rank.
        Eigen::Index cap = std::min<Eigen::Index>(D.cols(), static_cast<Eigen::Index>(L - 1) * R);
        if (R > 1)
            cap = std::min<Eigen::Index>(cap, static_cast<Eigen::Index>(R - 1) * L);
        if (cfg.max_order > 0)
            cap = std::min<Eigen::Index>(cap, cfg.max_order);
        P = static_cast<int>(std::min<Eigen::Index>(P, cap));
        if (P < 1)
            throw NumericalError("estimate_half: pencil too small for any path");
        out.p_hat = P;

        CMat Us = svd.matrixU().leftCols(P);
        // Rows of block i, in-block index l: i * L + l.
        CMat U1((L - 1) * R, P), U2((L - 1) * R, P);
        for (int i = 0; i < R; ++i)
        {
            U1.middleRows(i * (L - 1), L - 1) = Us.middleRows(i * L, L - 1);
            U2.middleRows(i * (L - 1), L - 1) = Us.middleRows(i * L + 1, L - 1);
        }
        CMat Pt = U1.colPivHouseholderQr().solve(U2);
        CMat Pa = CMat::Identity(P, P);
        if (R > 1)
        {
            CMat Ua1 = Us.topRows((R - 1) * L);
            CMat Ua2 = Us.bottomRows((R - 1) * L);
            Pa = Ua1.colPivHouseholderQr().solve(Ua2);
        }

        Eigen::ComplexEigenSolver<CMat> ces(Pt + kJointWeight * Pa);
        if (ces.info() != Eigen::Success)
            throw NumericalError("estimate_half: eigen-decomposition failed");
        CMat V = ces.eigenvectors();
        Eigen::PartialPivLU<CMat> lu(V);
        CMat Vi = lu.inverse();
        if (!Vi.allFinite())
            throw NumericalError("estimate_half: rank-deficient truncated pencil");
        CMat Tt = Vi * Pt * V;
        CMat Ta = Vi * Pa * V;

        for (int p = 0; p < P; ++p)
        {
            cplx zt = Tt(p, p), za = Ta(p, p);
            double mt = std::abs(zt), ma = std::abs(za);
            if (!(mt > 0.0) || !(ma > 0.0) || !std::isfinite(mt) || !std::isfinite(ma))
                throw NumericalError("estimate_half: degenerate pencil eigenvalue");
            out.max_circle_deviation = std::max({out.max_circle_deviation, std::abs(mt - 1.0), std::abs(ma - 1.0)});
            out.z_time.push_back(zt / mt);
            out.z_ant.push_back(za / ma);
        }
        out.off_circle_warning = out.max_circle_deviation > cfg.unit_circle_tol;

        const double T = cfg.sample_interval;
        for (int p = 0; p < P; ++p)
        {
            out.omega_hat.push_back(std::arg(out.z_time[static_cast<std::size_t>(p)]) / (2.0 * kPi * T));
            out.chi_theta_hat.push_back(std::arg(out.z_ant[static_cast<std::size_t>(p)]) * cfg.wavelength / (2.0 * kPi));
        }

        std::vector<cplx> amps = vandermonde_amplitudes(S, out.z_time, out.z_ant);
        if (which == Half::first)
        {
            out.c_delta1_hat = amps;
            if (bs.n_h >= 2)
                out.kappa_hat = vandermonde_amplitudes(column_samples(snapshots, bs, 1), out.z_time, out.z_ant);
            else
                out.kappa_hat = amps;
        }
        else
        {
            out.varpi_delta2_hat = amps;
        }
        return out;
    }

    std::vector<int> pair_dopplers(const RawEstimates &first, const RawEstimates &last)
    {
        if (first.p_hat != last.p_hat || first.z_time.size() != last.z_time.size())
            throw NumericalError("pair_dopplers: mismatched path counts (" + std::to_string(first.p_hat) + " vs " +
                                 std::to_string(last.p_hat) + ")");
        const int P = first.p_hat;
        // Circular distance of both pencil phases; the Doppler phase wraps at 1/T.
        auto cost = [&](int p, int q)
        {
            double c = std::abs(std::arg(first.z_time[std::size_t(p)] / last.z_time[std::size_t(q)]));
            if (!first.z_ant.empty() && !last.z_ant.empty())
                c += std::abs(std::arg(first.z_ant[std::size_t(p)] / last.z_ant[std::size_t(q)]));
            return c;
        };
        std::vector<int> perm(static_cast<std::size_t>(P));
        std::iota(perm.begin(), perm.end(), 0);
        if (P <= 8)
        {
            std::vector<int> best = perm, cur = perm;
            double best_cost = std::numeric_limits<double>::infinity();
            do
            {
                double c = 0.0;
                for (int p = 0; p < P; ++p)
                    c += cost(p, cur[std::size_t(p)]);
                if (c < best_cost)
                {
                    best_cost = c;
                    best = cur;
                }
            } while (std::next_permutation(cur.begin(), cur.end()));
            return best;
        }
        // Greedy: repeatedly take the globally cheapest remaining pair.
        std::vector<bool> used_p(std::size_t(P), false), used_q(std::size_t(P), false);
        for (int step = 0; step < P; ++step)
        {
            double best_cost = std::numeric_limits<double>::infinity();
            int bp = -1, bq = -1;
            for (int p = 0; p < P; ++p)
            {
                if (used_p[std::size_t(p)])
                    continue;
                for (int q = 0; q < P; ++q)
                {
                    if (used_q[std::size_t(q)])
                        continue;
                    double c = cost(p, q);
                    if (c < best_cost)
                    {
                        best_cost = c;
                        bp = p;
                        bq = q;
                    }
                }
            }
            used_p[std::size_t(bp)] = true;
            used_q[std::size_t(bq)] = true;
            perm[std::size_t(bp)] = bq;
        }
        return perm;
    }

    EstimatedModel recover_angles(const RawEstimates &first, const RawEstimates &last, const std::vector<int> &perm,
                                  const UpaGeometry &bs, const FluidAntennaGeometry &fa, const PencilConfig &cfg)
    {
        if (cfg.delta1 == cfg.delta2)
            throw ConfigError("recover_angles: delta1 must differ from delta2");
        const int P = first.p_hat;
        if (static_cast<int>(perm.size()) != P || static_cast<int>(last.varpi_delta2_hat.size()) != P)
            throw NumericalError("recover_angles: inconsistent estimate sizes");
        const double lambda = fa.wavelength;
        const double T = cfg.sample_interval;
        const double drx = fa.port_spacing();
        EstimatedModel model;
        for (int p = 0; p < P; ++p)
        {
            const std::size_t ip = std::size_t(p);
            EstimatedPath e;
            e.doppler = first.omega_hat[ip];

            const double arg_v = first.chi_theta_hat[ip] / bs.d_v;
            if (std::abs(arg_v) > 1.0 + 1e-3)
                throw NumericalError("recover_angles: |chi / d_v| = " + std::to_string(std::abs(arg_v)) +
                                     " exceeds 1");
            const double cos_t = std::clamp(arg_v, -1.0, 1.0);
            e.eod = std::acos(cos_t);

            const cplx c1 = first.c_delta1_hat[ip];
            const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
            if (bs.n_h >= 2 && sin_t > 1e-12 && std::abs(c1) > 0.0)
            {
                const double psi = std::arg(first.kappa_hat[ip] / c1);
                const double s = lambda * psi / (2.0 * kPi * bs.d_h * sin_t);
                e.aod = std::asin(std::clamp(s, -1.0, 1.0));
            }

            const cplx varpi = last.varpi_delta2_hat[std::size_t(perm[ip])];
            const cplx ratio = varpi / c1 * std::polar(1.0, -kPi * cfg.n_s * e.doppler * T);
            const double cos_rx = std::clamp(std::arg(ratio) * lambda / (2.0 * kPi * drx * (cfg.delta2 - cfg.delta1)),
                                             -1.0, 1.0);
            e.eoa = std::acos(cos_rx);
            e.gain = c1 * std::polar(1.0, -2.0 * kPi / lambda * cos_rx * drx * (cfg.delta1 - 1));
            model.paths.push_back(e);
        }
        return model;
    }

    EstimationResult estimate_model(const UplinkSamples &samples, const UpaGeometry &bs,
                                    const FluidAntennaGeometry &fa, const PencilConfig &cfg_in)
    {
        PencilConfig cfg = cfg_in.resolved(bs, fa);
        EstimationResult r;
        r.first = estimate_half(samples.first, bs, cfg, Half::first);
        r.last = estimate_half(samples.last, bs, cfg, Half::last, r.first.p_hat);
        r.perm = pair_dopplers(r.first, r.last);
        r.model = recover_angles(r.first, r.last, r.perm, bs, fa, cfg);
        const int P = r.first.p_hat;
        r.pencil_window_ok = (P + 1 < cfg.pencil_l) && (cfg.pencil_l < cfg.half() - P + 2);
        return r;
    }

    ChannelSnapshot reconstruct_channel(const EstimatedModel &model, const UpaGeometry &bs,
                                        const FluidAntennaGeometry &fa, double t, int m)
    {
        if (model.paths.empty())
            throw std::invalid_argument("reconstruct_channel: empty model");
        return ChannelSnapshot{t, m, evaluate_rays(model.rays(), bs, fa, t, m)};
    }
}
