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

#include "mpmp/common.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace mpmp
{
    std::uint64_t splitmix64(std::uint64_t &state)
    {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t fnv1a64(std::string_view data)
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (unsigned char c : data)
        {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    std::uint64_t derive_seed(std::uint64_t master, std::string_view kind, std::uint64_t index)
    {
        std::uint64_t state = master ^ fnv1a64(kind);
        state += 0x9E3779B97F4A7C15ULL * (index + 1);
        splitmix64(state);
        return splitmix64(state);
    }

    long long round_half_away(double x)
    {
        return std::llround(x);
    }

    double wrap_angle(double x)
    {
        double y = std::remainder(x, 2.0 * kPi);
        if (y <= -kPi)
            y += 2.0 * kPi;
        return y;
    }

    cplx complex_normal(Rng &rng, double sigma2)
    {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5 * sigma2));
        double re = nd(rng);
        double im = nd(rng);
        return {re, im};
    }

    unsigned resolve_threads(unsigned requested)
    {
        if (requested > 0)
            return requested;
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }

    void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn)
    {
        threads = resolve_threads(threads);
        if (threads <= 1 || n <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto worker = [&]()
        {
            for (;;)
            {
                std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        unsigned count = static_cast<unsigned>(std::min<std::size_t>(threads, n));
        pool.reserve(count);
        for (unsigned k = 0; k < count; ++k)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
        if (first_error)
            std::rethrow_exception(first_error);
    }
}
