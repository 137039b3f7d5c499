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

#ifndef MPMP_COMMON_HPP
#define MPMP_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mpmp
{
    using cplx = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using Vec3 = Eigen::Vector3d;

    inline constexpr double kPi = std::numbers::pi;
    inline constexpr double kSpeedOfLight = 299792458.0;
    inline constexpr cplx kJ{0.0, 1.0};

    // Invalid configuration or arguments (CLI exit code 1).
    class ConfigError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Numerical failure inside an algorithm (CLI exit code 2).
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Random stream used by every stochastic operation.
    using Rng = std::mt19937_64;

    // SplitMix64 finalizer; advances the state.
    std::uint64_t splitmix64(std::uint64_t &state);

    // Per-unit seed: mixes the master seed, a unit kind label and a unit index.
    // seed = splitmix64(master ^ fnv1a(kind) + golden * (index + 1)) applied twice.
    std::uint64_t derive_seed(std::uint64_t master, std::string_view kind, std::uint64_t index);

    // FNV-1a 64-bit hash of a byte string.
    std::uint64_t fnv1a64(std::string_view data);

    // Nearest integer, halves rounded away from zero.
    long long round_half_away(double x);

    // Wraps an angle into (-pi, pi].
    double wrap_angle(double x);

    // Circularly-symmetric complex Gaussian sample of variance sigma2.
    cplx complex_normal(Rng &rng, double sigma2);

    // Runs fn(i) for i in [0, n) on up to `threads` workers. Work is handed out
    // by index, so any result written to slot i is independent of scheduling.
    void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn);

    // Resolves a requested thread count (0 = hardware concurrency).
    unsigned resolve_threads(unsigned requested);
}

#endif
