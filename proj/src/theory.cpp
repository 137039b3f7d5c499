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

#include "mpmp/theory.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace mpmp
{
    double bessel_j0(double x)
    {
        const double ax = std::abs(x);
        if (ax <= 12.0)
        {
            // sum_k (-1)^k (x^2 / 4)^k / (k!)^2
            const double q = 0.25 * ax * ax;
            double term = 1.0, sum = 1.0;
            for (int k = 1; k < 80; ++k)
            {
                term *= -q / (double(k) * k);
                sum += term;
                if (std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum)) && k > 2)
                    break;
            }
            return sum;
        }
        // J0(x) ~ sqrt(2 / (pi x)) (P cos chi - Q sin chi), chi = x - pi / 4, with
        // a_k = prod_{j <= k} (-(2j - 1)^2) / (k! 8^k) and the series cut at its
        // smallest term.
        double p = 0.0, q = 0.0;
        double a = 1.0; // a_k / x^k
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 60; ++k)
        {
            if (k > 0)
            {
                const double odd = 2.0 * k - 1.0;
                a *= -(odd * odd) / (double(k) * 8.0 * ax);
            }
            if (std::abs(a) > prev)
                break;
            prev = std::abs(a);
            // k even contributes (-1)^(k/2) a_k to P, k odd contributes (-1)^((k-1)/2) a_k to Q.
            const double s = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
            (k % 2 == 0 ? p : q) += s * a;
            if (std::abs(a) < 1e-17)
                break;
        }
        const double chi = ax - 0.25 * kPi;
        return std::sqrt(2.0 / (kPi * ax)) * (p * std::cos(chi) - q * std::sin(chi));
    }

    BoundInputs BoundInputs::make(double a1, double b1, double c1, double d1, double e1, double f1, double d_nh,
                                  double d_nv, double tau_min, double tau_max, double k_r, double f,
                                  double varsigma_los, double delta_los)
    {
        BoundInputs in;
        in.a1 = a1;
        in.b1 = b1;
        in.c1 = c1;
        in.d1 = d1;
        in.e1 = e1;
        in.f1 = f1;
        in.d_nh = d_nh;
        in.d_nv = d_nv;
        in.upsilon = std::sqrt(d1 * d1 + e1 * e1 + f1 * f1);
        in.gamma = std::sqrt((2 * a1 + d1) * (2 * a1 + d1) + (2 * b1 + e1) * (2 * b1 + e1) +
                             (2 * c1 + f1) * (2 * c1 + f1));
        in.eta = std::sqrt(a1 * a1 + b1 * b1 + c1 * c1);
        in.tau_min = tau_min;
        in.tau_max = tau_max;
        in.k_r = k_r;
        in.f = f;
        in.varsigma_los = varsigma_los;
        in.delta_los = delta_los;
        in.validate();
        return in;
    }

    BoundInputs BoundInputs::from_geometry(const Vec3 &velocity, double csi_delay, double t, int m, int ih, int iv,
                                           const UpaGeometry &bs, const FluidAntennaGeometry &fa, double tau_min,
                                           double tau_max, double k_r, double f, const Path &los)
    {
        const double lambda = fa.wavelength;
        Vec3 abc = kPi * csi_delay * velocity / lambda;
        abc.z() += kPi * (m - 1) * fa.port_spacing() / lambda;
        const Vec3 def = 2.0 * kPi * t * velocity / lambda;
        const double dnh = kPi * bs.d_h * ih / lambda;
        const double dnv = kPi * bs.d_v * iv / lambda;
        const Vec3 r = arrival_direction(los.eoa, los.aoa);
        const double vs = abc.dot(r);
        const double dl = 2.0 * kPi * f * los.delay + def.dot(r) + 2.0 * dnh * std::sin(los.eod) * std::sin(los.aod) +
                          2.0 * dnv * std::cos(los.eod);
        return make(abc.x(), abc.y(), abc.z(), def.x(), def.y(), def.z(), dnh, dnv, tau_min, tau_max, k_r, f, vs, dl);
    }

    void BoundInputs::validate() const
    {
        if (!(tau_max > tau_min))
            throw ConfigError("BoundInputs: tau_max must exceed tau_min");
        if (k_r < 0.0)
            throw ConfigError("BoundInputs: k_r must be >= 0");
        auto check = [](double stored, double recomputed, const char *name)
        {
            if (std::abs(stored - recomputed) > 1e-12 * std::max(1.0, std::abs(recomputed)))
                throw ConfigError(std::string("BoundInputs: ") + name + " is inconsistent with its components");
        };
        check(upsilon, std::sqrt(d1 * d1 + e1 * e1 + f1 * f1), "upsilon");
        check(gamma,
              std::sqrt((2 * a1 + d1) * (2 * a1 + d1) + (2 * b1 + e1) * (2 * b1 + e1) + (2 * c1 + f1) * (2 * c1 + f1)),
              "gamma");
        check(eta, std::sqrt(a1 * a1 + b1 * b1 + c1 * c1), "eta");
    }

    namespace
    {
        double window(const BoundInputs &in) { return in.tau_max - in.tau_min; }
        double phase_ref(const BoundInputs &in) { return in.delta_los + in.varsigma_los; }

        // E cos(2 pi f tau) and E sin(2 pi f tau) for tau uniform on the window.
        double expect_cos_delay(const BoundInputs &in)
        {
            const double w = 2.0 * kPi * in.f;
            return (std::sin(w * in.tau_max) - std::sin(w * in.tau_min)) / (w * window(in));
        }

        // |E exp(j 2 pi f tau)|^2
        double expect_delay_phasor_sq(const BoundInputs &in)
        {
            const double x = 2.0 * kPi * in.f * window(in);
            if (std::abs(x) < 1e-4)
                return 1.0 - x * x / 12.0;
            return (2.0 - 2.0 * std::cos(x)) / (x * x);
        }

        double j0_pair(double u, double v) { return bessel_j0(u) * bessel_j0(v); }
    }

    double expect_cos_g(const BoundInputs &in)
    {
        return j0_pair(0.5 * (in.upsilon + in.f1), 0.5 * (in.upsilon - in.f1));
    }

    double expect_cos_a(const BoundInputs &in)
    {
        const double z = 2.0 * in.c1 + in.f1;
        return j0_pair(0.5 * (in.gamma + z), 0.5 * (in.gamma - z));
    }

    double expect_cos_b(const BoundInputs &in)
    {
        const double r = std::hypot(in.d_nh, in.d_nv);
        return j0_pair(r + in.d_nv, r - in.d_nv);
    }

    double expect_cos_k(const BoundInputs &in)
    {
        const double w = 2.0 * kPi * in.f;
        const double ph = phase_ref(in);
        return (std::sin(w * in.tau_max - ph) - std::sin(w * in.tau_min - ph)) / (w * window(in));
    }

    double expect_sin_k(const BoundInputs &in)
    {
        const double w = 2.0 * kPi * in.f;
        const double ph = phase_ref(in);
        return (std::cos(w * in.tau_min - ph) - std::cos(w * in.tau_max - ph)) / (w * window(in));
    }

    double expect_cos_delta_2varsigma(const BoundInputs &in)
    {
        return expect_cos_delay(in) * expect_cos_a(in) * expect_cos_b(in);
    }

    double expect_cos_delta(const BoundInputs &in)
    {
        return expect_cos_delay(in) * expect_cos_g(in) * expect_cos_b(in);
    }

    double expect_sin2_varsigma(const BoundInputs &in)
    {
        return 0.5 * (1.0 - j0_pair(in.eta + in.c1, in.eta - in.c1));
    }

    double cross_term_los_nlos(const BoundInputs &in)
    {
        if (!(in.tau_max > in.tau_min))
            throw ConfigError("cross_term_los_nlos: empty delay window");
        const double k = in.k_r;
        const double w = 2.0 * kPi * in.f;
        const double ph = phase_ref(in);
        const double win = (std::cos(w * in.tau_min - ph) - std::cos(w * in.tau_max - ph)) / window(in);
        return std::sqrt(k) * std::sin(in.varsigma_los) / (w * (k + 1.0)) * win * expect_cos_b(in) *
               (expect_cos_a(in) - expect_cos_g(in));
    }

    double cross_term_nlos_nlos(const BoundInputs &in)
    {
        if (!(in.tau_max > in.tau_min))
            throw ConfigError("cross_term_nlos_nlos: empty delay window");
        const double eb = expect_cos_b(in);
        const double diff = expect_cos_a(in) - expect_cos_g(in);
        return expect_delay_phasor_sq(in) / (4.0 * (in.k_r + 1.0)) * eb * eb * diff * diff;
    }

    double non_cross_term(const BoundInputs &in)
    {
        const double k = in.k_r;
        const double s = std::sin(in.varsigma_los);
        return k / (k + 1.0) * s * s + expect_sin2_varsigma(in) / (k + 1.0);
    }

    double mse_upper_term(const BoundInputs &in)
    {
        return 2.0 / (in.k_r + 1.0) * (1.0 - j0_pair(in.eta + in.c1, in.eta - in.c1));
    }

    MseBounds mse_bounds(const BoundInputs &in, double lambda_term, double omega_term)
    {
        MseBounds b;
        b.x = cross_term_los_nlos(in);
        b.y = cross_term_nlos_nlos(in);
        b.z = non_cross_term(in);
        b.u = mse_upper_term(in);
        const double s = 4.0 * (b.x + b.y + b.z);
        const double rhs = -omega_term + b.x;
        const double scale = std::max({1.0, std::abs(lambda_term), std::abs(omega_term), std::abs(b.x)});
        if (std::abs(lambda_term - rhs) <= 1e-12 * scale)
        {
            b.regime = 3;
            b.lower = b.upper = s;
        }
        else if (lambda_term < rhs)
        {
            b.regime = 1;
            b.lower = 0.0;
            b.upper = std::min(s, b.u);
        }
        else
        {
            b.regime = 2;
            b.lower = std::max(0.0, s);
            b.upper = b.u;
        }
        return b;
    }

    double los_mse_bound(double rho, double k_r)
    {
        if (!(rho > 0.0))
            throw ConfigError("los_mse_bound: rho must be positive");
        const double w = std::isinf(k_r) ? 1.0 : k_r / (k_r + 1.0);
        return w * (2.0 - 2.0 * std::cos(kPi / rho));
    }

    namespace
    {
        const std::map<std::string, Term> &term_table()
        {
            static const std::map<std::string, Term> table{
                {"cos_g", Term::cos_g},
                {"cos_a", Term::cos_a},
                {"cos_b", Term::cos_b},
                {"cos_k", Term::cos_k},
                {"sin_k", Term::sin_k},
                {"cos_delta_2varsigma", Term::cos_delta_2varsigma},
                {"cos_delta", Term::cos_delta},
                {"sin2_varsigma", Term::sin2_varsigma},
                {"sin_g", Term::sin_g},
                {"sin_a", Term::sin_a},
                {"sin_b", Term::sin_b},
                {"los_nlos_cross", Term::los_nlos_cross},
                {"nlos_nlos_cross", Term::nlos_nlos_cross},
                {"non_cross", Term::non_cross},
            };
            return table;
        }

        PathDraw draw_one(const BoundInputs &in, Rng &rng)
        {
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            PathDraw d;
            d.tau = in.tau_min + (in.tau_max - in.tau_min) * u01(rng);
            d.eoa = kPi * u01(rng);
            d.aoa = kPi - 2.0 * kPi * u01(rng);
            d.eod = kPi * u01(rng);
            d.aod = kPi - 2.0 * kPi * u01(rng);
            return d;
        }

        struct PathPhases
        {
            double g, a, b, varsigma, delta, delay;
        };

        PathPhases phases(const BoundInputs &in, const PathDraw &d)
        {
            const double se = std::sin(d.eoa);
            const double rx = se * std::cos(d.aoa), ry = se * std::sin(d.aoa), rz = std::cos(d.eoa);
            PathPhases p;
            p.g = in.d1 * rx + in.e1 * ry + in.f1 * rz;
            p.varsigma = in.a1 * rx + in.b1 * ry + in.c1 * rz;
            p.a = 2.0 * p.varsigma + p.g;
            p.b = 2.0 * in.d_nh * std::sin(d.eod) * std::sin(d.aod) + 2.0 * in.d_nv * std::cos(d.eod);
            p.delay = 2.0 * kPi * in.f * d.tau;
            p.delta = p.delay + p.g + p.b;
            return p;
        }

        double sample(Term term, const BoundInputs &in, Rng &rng)
        {
            const PathPhases p = phases(in, draw_one(in, rng));
            const double k = in.k_r;
            const double ref = phase_ref(in);
            switch (term)
            {
            case Term::cos_g:
                return std::cos(p.g);
            case Term::cos_a:
                return std::cos(p.a);
            case Term::cos_b:
                return std::cos(p.b);
            case Term::cos_k:
                return std::cos(p.delay - ref);
            case Term::sin_k:
                return std::sin(p.delay - ref);
            case Term::cos_delta_2varsigma:
                return std::cos(p.delta + 2.0 * p.varsigma);
            case Term::cos_delta:
                return std::cos(p.delta);
            case Term::sin2_varsigma:
            {
                const double s = std::sin(p.varsigma);
                return s * s;
            }
            case Term::sin_g:
                return std::sin(p.g);
            case Term::sin_a:
                return std::sin(p.a);
            case Term::sin_b:
                return std::sin(p.b);
            case Term::los_nlos_cross:
                return 2.0 * std::sqrt(k) / (k + 1.0) * std::sin(in.varsigma_los) * std::sin(p.varsigma) *
                       std::cos(p.delta + p.varsigma - ref);
            case Term::nlos_nlos_cross:
            {
                const PathPhases q = phases(in, draw_one(in, rng));
                return std::sin(p.varsigma) * std::sin(q.varsigma) *
                       std::cos(p.delta + p.varsigma - q.delta - q.varsigma) / (k + 1.0);
            }
            case Term::non_cross:
            {
                const double sl = std::sin(in.varsigma_los), s = std::sin(p.varsigma);
                return k / (k + 1.0) * sl * sl + s * s / (k + 1.0);
            }
            }
            throw ConfigError("unknown Monte Carlo selector");
        }

        struct Sums
        {
            double s = 0.0, s2 = 0.0;
            std::size_t n = 0;
        };

        McResult finish(const Sums &sum)
        {
            McResult r;
            const double n = static_cast<double>(sum.n);
            r.mean = sum.s / n;
            const double var = std::max(0.0, (sum.s2 - n * r.mean * r.mean) / (n - 1.0));
            r.standard_error = std::sqrt(var / n);
            return r;
        }
    }

    Term parse_term(const std::string &name)
    {
        auto it = term_table().find(name);
        if (it == term_table().end())
            throw ConfigError("unknown Monte Carlo selector '" + name + "'");
        return it->second;
    }

    std::string term_name(Term t)
    {
        for (const auto &[name, term] : term_table())
            if (term == t)
                return name;
        throw ConfigError("unknown Monte Carlo selector");
    }

    double closed_form(Term t, const BoundInputs &in)
    {
        switch (t)
        {
        case Term::cos_g:
            return expect_cos_g(in);
        case Term::cos_a:
            return expect_cos_a(in);
        case Term::cos_b:
            return expect_cos_b(in);
        case Term::cos_k:
            return expect_cos_k(in);
        case Term::sin_k:
            return expect_sin_k(in);
        case Term::cos_delta_2varsigma:
            return expect_cos_delta_2varsigma(in);
        case Term::cos_delta:
            return expect_cos_delta(in);
        case Term::sin2_varsigma:
            return expect_sin2_varsigma(in);
        case Term::sin_g:
        case Term::sin_a:
        case Term::sin_b:
            return 0.0;
        case Term::los_nlos_cross:
            return cross_term_los_nlos(in);
        case Term::nlos_nlos_cross:
            return cross_term_nlos_nlos(in);
        case Term::non_cross:
            return non_cross_term(in);
        }
        throw ConfigError("unknown Monte Carlo selector");
    }

    McResult monte_carlo_expectation(Term term, const BoundInputs &in, std::size_t draws, Rng &rng)
    {
        if (draws < 100)
            throw ConfigError("monte_carlo_expectation: need at least 100 draws");
        in.validate();
        Sums sum;
        for (std::size_t i = 0; i < draws; ++i)
        {
            const double v = sample(term, in, rng);
            sum.s += v;
            sum.s2 += v * v;
        }
        sum.n = draws;
        return finish(sum);
    }

    McResult monte_carlo_expectation(Term term, const BoundInputs &in, std::size_t draws, std::uint64_t seed,
                                     unsigned threads)
    {
        if (draws < 100)
            throw ConfigError("monte_carlo_expectation: need at least 100 draws");
        in.validate();
        constexpr std::size_t chunk = 1 << 16;
        const std::size_t n_chunks = (draws + chunk - 1) / chunk;
        std::vector<Sums> parts(n_chunks);
        const std::string kind = "mc:" + term_name(term);
        parallel_for(n_chunks, threads,
                     [&](std::size_t c)
                     {
                         Rng rng(derive_seed(seed, kind, c));
                         const std::size_t n = std::min(chunk, draws - c * chunk);
                         Sums &s = parts[c];
                         for (std::size_t i = 0; i < n; ++i)
                         {
                             const double v = sample(term, in, rng);
                             s.s += v;
                             s.s2 += v * v;
                         }
                         s.n = n;
                     });
        Sums total;
        for (const auto &p : parts) // fixed order keeps the sum reproducible
        {
            total.s += p.s;
            total.s2 += p.s2;
            total.n += p.n;
        }
        return finish(total);
    }

    std::vector<PathDraw> draw_paths(const BoundInputs &in, std::size_t count, Rng &rng)
    {
        std::vector<PathDraw> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            out.push_back(draw_one(in, rng));
        return out;
    }

    FiniteTerms finite_terms(const BoundInputs &in, const std::vector<PathDraw> &paths)
    {
        if (paths.empty())
            throw std::invalid_argument("finite_terms: no NLoS paths");
        const double k = in.k_r;
        const double P = static_cast<double>(paths.size());
        const double sl = std::sin(in.varsigma_los);
        const double ref = phase_ref(in);
        double sum_sq = 0.0, omega = 0.0;
        cplx sum_x = 0.0;
        for (const auto &d : paths)
        {
            const PathPhases p = phases(in, d);
            const double s = std::sin(p.varsigma);
            sum_sq += s * s;
            omega += s * sl * std::cos(p.delta + p.varsigma - ref);
            sum_x += s * std::polar(1.0, p.delta + p.varsigma);
        }
        FiniteTerms t;
        t.xi = k / (k + 1.0) * sl * sl + sum_sq / ((k + 1.0) * P);
        t.omega = 2.0 * std::sqrt(k) / (k + 1.0) / std::sqrt(P) * omega;
        t.lambda = (std::norm(sum_x) - sum_sq) / ((k + 1.0) * P);
        const cplx tot = std::sqrt(k / (k + 1.0)) * sl * std::polar(1.0, ref) + std::sqrt(1.0 / (k + 1.0)) / std::sqrt(P) * sum_x;
        t.error = 4.0 * std::norm(tot);
        return t;
    }

    BoundInputs random_bound_inputs(Rng &rng)
    {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double f = 1e5 + 9e5 * u(rng);
        const double tau_min = 1e-6 * u(rng);
        const double tau_max = tau_min + (0.05 + 1.45 * u(rng)) / f;
        double c[6];
        for (double &x : c)
            x = 6.0 * u(rng) - 3.0;
        const double d_nh = 3.0 * u(rng);
        const double d_nv = 3.0 * u(rng);
        const double k_r = 0.5 + 9.5 * u(rng);
        const double vs = 2.0 * kPi * u(rng) - kPi;
        const double dl = 2.0 * kPi * u(rng) - kPi;
        return BoundInputs::make(c[0], c[1], c[2], c[3], c[4], c[5], d_nh, d_nv, tau_min, tau_max, k_r, f, vs, dl);
    }
}
