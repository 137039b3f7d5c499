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

#include "mpmp/port_selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace mpmp
{
    double ErrorFunctional::dirichlet(int n, double x)
    {
        // Reduce to y in [-pi, pi]; shifting x by 2 pi k flips the sign when k (n - 1) is odd.
        const double y = std::remainder(x, 2.0 * kPi);
        const long long k = std::llround((x - y) / (2.0 * kPi));
        const double sign = ((k * (n - 1)) % 2 == 0) ? 1.0 : -1.0;
        double v;
        if (std::abs(y) < 1e-6)
            v = n * (1.0 - (double(n) * n - 1.0) * y * y / 24.0);
        else
            v = std::sin(n * y / 2.0) / std::sin(y / 2.0);
        return sign * v;
    }

    ErrorFunctional::ErrorFunctional(const std::vector<Ray> &rays, const UpaGeometry &bs,
                                     const FluidAntennaGeometry &fa, double t, double dt)
        : rays_(rays), bs_(bs), fa_(fa), t_(t), dt_(dt)
    {
        const double lambda = fa.wavelength;
        const std::size_t P = rays.size();
        mag_.resize(P);
        s0_.resize(P);
        slope_.resize(P);
        psi0_.resize(P);
        kh_.resize(P);
        kv_.resize(P);
        for (std::size_t p = 0; p < P; ++p)
        {
            const Ray &r = rays[p];
            mag_[p] = std::abs(r.gain);
            kh_[p] = 2.0 * kPi / lambda * std::sin(r.eod) * std::sin(r.aod) * bs.d_h;
            kv_[p] = 2.0 * kPi / lambda * std::cos(r.eod) * bs.d_v;
            s0_[p] = kPi * r.doppler * dt;
            slope_[p] = kPi * std::cos(r.eoa) / lambda;
            psi0_[p] = std::arg(r.gain) + 2.0 * kPi * r.doppler * t + 0.5 * (bs.n_h - 1) * kh_[p] +
                       0.5 * (bs.n_v - 1) * kv_[p] + s0_[p];
        }
        weight_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
        for (std::size_t p = 0; p < P; ++p)
            for (std::size_t q = p + 1; q < P; ++q)
                weight_(Eigen::Index(p), Eigen::Index(q)) = 8.0 * mag_[p] * mag_[q] *
                                                            dirichlet(bs.n_h, kh_[p] - kh_[q]) *
                                                            dirichlet(bs.n_v, kv_[p] - kv_[q]);
        sym_weight_ = weight_ + weight_.transpose();
    }

    double ErrorFunctional::varsigma(std::size_t p, double x) const
    {
        return s0_[p] + slope_[p] * x;
    }

    double ErrorFunctional::delta(std::size_t p, int ih, int iv) const
    {
        return std::arg(rays_[p].gain) + 2.0 * kPi * rays_[p].doppler * t_ + kh_[p] * ih + kv_[p] * iv;
    }

    double ErrorFunctional::at_position(double x) const
    {
        const std::size_t P = mag_.size();
        // Thread-local scratch keeps the hot loop allocation free.
        thread_local std::vector<double> u, v;
        u.resize(P);
        v.resize(P);
        double diag = 0.0;
        for (std::size_t p = 0; p < P; ++p)
        {
            const double sv = slope_[p] * x;
            const double s = std::sin(s0_[p] + sv);
            const double psi = psi0_[p] + sv;
            u[p] = s * std::cos(psi);
            v[p] = s * std::sin(psi);
            diag += mag_[p] * mag_[p] * s * s;
        }
        double cross = 0.0;
        for (std::size_t p = 0; p < P; ++p)
        {
            double acc = 0.0;
            for (std::size_t q = p + 1; q < P; ++q)
                acc += weight_(Eigen::Index(p), Eigen::Index(q)) * (u[p] * u[q] + v[p] * v[q]);
            cross += acc;
        }
        return std::max(0.0, 4.0 * bs_.n_t() * diag + cross);
    }

    std::vector<double> ErrorFunctional::at_grid(double h, long long n) const
    {
        const std::size_t P = mag_.size();
        constexpr long long kBlock = 256, kResync = 32;
        std::vector<double> out(std::size_t(std::max(0LL, n + 1)));
        // Phasors of varsigma_p and of psi_p at the current grid point.
        std::vector<cplx> zs(P), zp(P), rot(P);
        for (std::size_t p = 0; p < P; ++p)
            rot[p] = std::polar(1.0, slope_[p] * h);
        Eigen::MatrixXd u(Eigen::Index(P), kBlock), v(Eigen::Index(P), kBlock);
        for (long long start = 0; start <= n; start += kBlock)
        {
            const long long count = std::min(kBlock, n + 1 - start);
            Eigen::RowVectorXd diag = Eigen::RowVectorXd::Zero(count);
            for (long long i = 0; i < count; ++i)
            {
                const long long g = start + i;
                for (std::size_t p = 0; p < P; ++p)
                {
                    if (g % kResync == 0)
                    {
                        const double sv = slope_[p] * (double(g) * h);
                        zs[p] = std::polar(1.0, s0_[p] + sv);
                        zp[p] = std::polar(1.0, psi0_[p] + sv);
                    }
                    else
                    {
                        zs[p] *= rot[p];
                        zp[p] *= rot[p];
                    }
                    const double s = zs[p].imag();
                    u(Eigen::Index(p), i) = s * zp[p].real();
                    v(Eigen::Index(p), i) = s * zp[p].imag();
                    diag(i) += mag_[p] * mag_[p] * s * s;
                }
            }
            const auto ub = u.leftCols(count), vb = v.leftCols(count);
            // sum_{p<q} w_pq (u_p u_q + v_p v_q) = (u^T S u + v^T S v) / 2.
            const Eigen::RowVectorXd cross =
                0.5 * ((sym_weight_ * ub).cwiseProduct(ub) + (sym_weight_ * vb).cwiseProduct(vb)).colwise().sum();
            for (long long i = 0; i < count; ++i)
                out[std::size_t(start + i)] = std::max(0.0, 4.0 * bs_.n_t() * diag(i) + cross(i));
        }
        return out;
    }

    double ErrorFunctional::at_port(int m) const
    {
        return at_position(fa_.port_position(m));
    }

    double error_norm_sq(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa, int m,
                         double t, double dt)
    {
        if (m < 1 || m > fa.m_ports)
            throw std::out_of_range("port index " + std::to_string(m) + " outside [1, " +
                                    std::to_string(fa.m_ports) + "]");
        return ErrorFunctional(rays, bs, fa, t, dt).at_port(m);
    }

    double error_norm_sq(const PathSet &ps, const UpaGeometry &bs, const FluidAntennaGeometry &fa, int m, double t,
                         double dt)
    {
        return error_norm_sq(to_rays(ps), bs, fa, m, t, dt);
    }

    double error_norm_sq(const EstimatedModel &model, const UpaGeometry &bs, const FluidAntennaGeometry &fa, int m,
                         double t, double dt)
    {
        return error_norm_sq(model.rays(), bs, fa, m, t, dt);
    }

    double error_norm_sq_direct(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                                int m, double t, double dt)
    {
        CVec moved = evaluate_rays(rays, bs, fa, t + dt, m);
        CVec ref = evaluate_rays(rays, bs, fa, t, 1);
        return (moved - ref).squaredNorm();
    }

    LosSelection select_port_los(const Ray &ray, const FluidAntennaGeometry &fa, double dt, int prev_port)
    {
        const double c = std::cos(ray.eoa);
        if (std::abs(c) < 1e-6)
            throw NumericalError("select_port_los: |cos theta_rx| < 1e-6, port selection is degenerate");
        const double rho = fa.port_density();
        const double wd = ray.doppler * dt;
        const int M = fa.m_ports;
        auto residual = [&](double x) // g(x) = sin^2 varsigma
        {
            const double s = std::sin(kPi * wd + kPi * c * x / fa.wavelength);
            return s * s;
        };
        auto to_port = [&](double x)
        { return static_cast<int>(std::clamp<long long>(round_half_away(x / fa.port_spacing()) + 1, 1, M)); };
        auto wrap_at = [&](double x) { return round_half_away(wd + c * x / fa.wavelength); };

        const long long t_los = std::llabs(round_half_away(rho / c));
        LosSelection out;
        out.full_period = t_los <= M - 1;

        // Zeros of g on [0, W lambda]: x_k = lambda (k - wd) / c.
        const double a = std::min(wd, fa.w * c + wd), b = std::max(wd, fa.w * c + wd);
        struct Cand
        {
            double x;
            long long k;
        };
        std::vector<Cand> zeros;
        for (long long k = static_cast<long long>(std::ceil(a)); k <= static_cast<long long>(std::floor(b)); ++k)
            zeros.push_back({std::clamp(fa.wavelength * (double(k) - wd) / c, 0.0, fa.length()), k});

        if (out.full_period && !zeros.empty())
        {
            if (prev_port > 0)
            {
                long long best = std::numeric_limits<long long>::max();
                for (const auto &z : zeros)
                {
                    int m = to_port(z.x);
                    long long travel = std::llabs(static_cast<long long>(m) - prev_port);
                    if (travel < best)
                    {
                        best = travel;
                        out.port = m;
                        out.k = z.k;
                    }
                }
                return out;
            }
            std::vector<Cand> cands = zeros;
            cands.push_back({0.0, wrap_at(0.0)});
            cands.push_back({fa.length(), wrap_at(fa.length())});
            double best = std::numeric_limits<double>::infinity();
            for (const auto &z : cands)
            {
                int m = to_port(z.x);
                double g = residual(fa.port_position(m));
                if (g < best)
                {
                    best = g;
                    out.port = m;
                    out.k = z.k;
                }
            }
            return out;
        }

        // Short FA: the minimum over [0, W lambda] is at an endpoint or at the
        // single interior zero, if any.
        std::vector<Cand> cands = zeros;
        cands.push_back({0.0, wrap_at(0.0)});
        cands.push_back({fa.length(), wrap_at(fa.length())});
        double best = std::numeric_limits<double>::infinity();
        for (const auto &z : cands)
        {
            double g = residual(z.x);
            if (g < best)
            {
                best = g;
                out.port = to_port(z.x);
                out.k = z.k;
            }
        }
        return out;
    }

    PeriodInfo compute_periods(const std::vector<Ray> &rays, const FluidAntennaGeometry &fa)
    {
        const double rho = fa.port_density();
        PeriodInfo info;
        long long l = 1;
        bool any = false;
        for (const auto &r : rays)
        {
            const double c = std::cos(r.eoa);
            long long tp = std::abs(c) < 1e-6 ? 0 : round_half_away(rho / c);
            info.t_p.push_back(tp);
            info.excluded.push_back(tp == 0);
            if (tp == 0)
                continue;
            const long long a = std::llabs(tp);
            if (!any)
                info.t_los = a;
            any = true;
            if (info.saturated)
                continue;
            const long long g = std::gcd(l, a);
            const long long step = a / g;
            if (l > PeriodInfo::saturation_limit / step)
            {
                info.saturated = true;
                l = PeriodInfo::saturation_limit;
            }
            else
            {
                l *= step;
            }
        }
        if (!any)
            throw NumericalError("compute_periods: every path has cos theta_rx = 0");
        info.t_eps = l;
        info.l_eps = static_cast<double>(l) * fa.port_spacing();
        return info;
    }

    int brute_force_port(const ErrorFunctional &f)
    {
        int best = 1;
        double best_val = f.at_port(1);
        for (int m = 2; m <= f.fa().m_ports; ++m)
        {
            double v = f.at_port(m);
            if (v < best_val)
            {
                best_val = v;
                best = m;
            }
        }
        return best;
    }

    int brute_force_port(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa, double t,
                         double dt)
    {
        return brute_force_port(ErrorFunctional(rays, bs, fa, t, dt));
    }

    namespace
    {
        constexpr double kInvPhi = 0.6180339887498949;

        double golden_section(const ErrorFunctional &f, double lo, double hi, double tol)
        {
            double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
            double f1 = f.at_position(x1), f2 = f.at_position(x2);
            while (hi - lo > tol)
            {
                if (f1 <= f2)
                {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - kInvPhi * (hi - lo);
                    f1 = f.at_position(x1);
                }
                else
                {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + kInvPhi * (hi - lo);
                    f2 = f.at_position(x2);
                }
            }
            return 0.5 * (lo + hi);
        }
    }

    int select_port_multipath(const ErrorFunctional &f)
    {
        const FluidAntennaGeometry &fa = f.fa();
        const double d = fa.port_spacing();
        // The whole FA is searched. Rounded per-path periods drift apart over
        // a few hundred ports, so one nominal period L_eps can miss the best
        // port by a wide margin.
        const double window = fa.length();
        try
        {
            (void)compute_periods(f.rays(), fa);
        }
        catch (const NumericalError &)
        {
            // f does not depend on the port at all.
            return 1;
        }

        const double h = d / 4.0;
        const long long n = static_cast<long long>(std::floor(window / h));
        std::vector<double> xs, fs = f.at_grid(h, n);
        xs.reserve(std::size_t(n + 2));
        for (long long i = 0; i <= n; ++i)
            xs.push_back(double(i) * h);
        if (window - xs.back() > 1e-9 * d)
        {
            xs.push_back(window);
            fs.push_back(f.at_position(window));
        }

        auto port_of = [&](double x) { return static_cast<int>(std::clamp<long long>(static_cast<long long>(x), 1, fa.m_ports)); };
        std::set<int> ports{1, port_of(std::floor(window / d) + 1.0)};
        const std::size_t N = xs.size();
        for (std::size_t i = 0; i < N; ++i)
        {
            const bool left = i == 0 || fs[i] <= fs[i - 1];
            const bool right = i + 1 == N || fs[i] <= fs[i + 1];
            if (!(left && right))
                continue;
            const double lo = xs[i == 0 ? 0 : i - 1], hi = xs[i + 1 == N ? N - 1 : i + 1];
            const double xm = hi > lo ? golden_section(f, lo, hi, 1e-3 * d) : lo;
            const double u = xm / d;
            ports.insert(port_of(std::floor(u) + 1.0));
            ports.insert(port_of(std::ceil(u) + 1.0));
        }
        int best = 1;
        double best_val = std::numeric_limits<double>::infinity();
        for (int m : ports) // ascending, so ties keep the lower index
        {
            double v = f.at_port(m);
            if (v < best_val)
            {
                best_val = v;
                best = m;
            }
        }
        return best;
    }

    int select_port_multipath(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                              double t, double dt)
    {
        return select_port_multipath(ErrorFunctional(rays, bs, fa, t, dt));
    }

    PortSchedule build_schedule(const std::vector<Ray> &rays, const UpaGeometry &bs, const FluidAntennaGeometry &fa,
                                double t0, const std::vector<double> &horizons)
    {
        if (rays.empty())
            throw std::invalid_argument("build_schedule: empty model");
        for (std::size_t i = 0; i < horizons.size(); ++i)
            if (!(horizons[i] > (i == 0 ? 0.0 : horizons[i - 1])))
                throw std::invalid_argument("build_schedule: horizons must be positive and strictly increasing");

        std::size_t strongest = 0;
        for (std::size_t p = 1; p < rays.size(); ++p)
            if (std::abs(rays[p].gain) > std::abs(rays[strongest].gain))
                strongest = p;

        PortSchedule s;
        int prev = 1;
        double prev_dt = 0.0;
        for (double dt : horizons)
        {
            ErrorFunctional f(rays, bs, fa, t0, dt);
            int port = 1;
            long long k = 0;
            if (rays.size() == 1)
            {
                try
                {
                    LosSelection sel = select_port_los(rays[0], fa, dt, prev);
                    port = sel.port;
                    k = sel.k;
                }
                catch (const NumericalError &)
                {
                    port = 1;
                }
            }
            else
            {
                port = select_port_multipath(f);
                k = round_half_away(f.varsigma(strongest, fa.port_position(port)) / kPi);
            }
            const double step = dt - prev_dt;
            const double speed = std::abs(port - prev) * fa.port_spacing() / step;
            const double bound = fa.length() / step;
            if (speed > bound * (1.0 + 1e-12))
                throw NumericalError("build_schedule: sliding speed " + std::to_string(speed) +
                                     " m/s exceeds the bound " + std::to_string(bound) + " m/s");
            s.horizons.push_back(dt);
            s.ports.push_back(port);
            s.wrap_counts.push_back(k);
            s.speeds.push_back(speed);
            s.f_values.push_back(f.at_port(port));
            s.speed_bounds.push_back(bound);
            prev = port;
            prev_dt = dt;
        }
        return s;
    }
}
