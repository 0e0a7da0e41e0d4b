// SPDX-License-Identifier: Apache-2.0
//
// cachebeam - cache-aided multi-antenna content delivery simulator
// Copyright (C) 2026 The cachebeam authors
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

#include "doctest.h"

#include "cachebeam/cc_core.hpp"

#include <algorithm>
#include <random>

using namespace cachebeam;

namespace
{

Bytes random_bytes(std::mt19937_64 &rng, std::size_t n)
{
    Bytes b(n);
    for (auto &x : b)
        x = static_cast<std::uint8_t>(rng() & 0xff);
    return b;
}

std::vector<Bytes> random_library(std::mt19937_64 &rng, int num_files, std::size_t length)
{
    std::vector<Bytes> files;
    for (int i = 0; i < num_files; ++i)
        files.push_back(random_bytes(rng, length));
    return files;
}

// Reference binomial by Pascal's triangle.
std::uint64_t pascal(int n, int k)
{
    std::vector<std::vector<std::uint64_t>> c(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i)
    {
        c[i].assign(static_cast<std::size_t>(i + 1), 1);
        for (int j = 1; j < i; ++j)
            c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
    }
    return (k < 0 || k > n) ? 0 : c[n][k];
}

// Full delivery for one user, independent of any harness code.
Bytes reconstruct(int k, const SystemConfig &cfg, const MessageSet &msgs, const PayloadLibrary &lib,
                  const std::vector<UserCache> &caches, const std::vector<int> &demands)
{
    const int t = cfg.caching_factor();
    const auto file = static_cast<std::size_t>(demands[static_cast<std::size_t>(k)]);
    std::vector<Bytes> segs(lib.labels().size());
    for (std::size_t j = 0; j < lib.labels().size(); ++j)
    {
        const UserSet &label = lib.labels()[j];
        if (label.contains(k))
            segs[j] = caches[static_cast<std::size_t>(k)].find(file, label)->bytes;
        else
        {
            std::vector<int> members = label.members();
            members.push_back(k);
            const UserSet T(members);
            REQUIRE(std::find(msgs.all.begin(), msgs.all.end(), T) != msgs.all.end());
            const Bytes coded = xor_encode(T, demands, lib, t);
            segs[j] = decode_user(k, T, coded, caches[static_cast<std::size_t>(k)], demands);
        }
    }
    return PayloadLibrary::reassemble(segs, lib.original_length(file));
}

} // namespace

TEST_CASE("binomial and subsets")
{
    for (int n = 0; n <= 20; ++n)
        for (int k = 0; k <= n; ++k)
            CHECK(binomial(n, k) == pascal(n, k));
    const auto subs = k_subsets(4, 2);
    REQUIRE(subs.size() == 6);
    CHECK(subs.front() == std::vector<int>{0, 1});
    CHECK(subs.back() == std::vector<int>{2, 3});
    CHECK(std::is_sorted(subs.begin(), subs.end()));
}

TEST_CASE("user sets")
{
    const UserSet a({3, 1, 2});
    CHECK(a.members() == std::vector<int>{1, 2, 3});
    CHECK(a.label() == "{2,3,4}");
    CHECK(a == UserSet({1, 2, 3}));
    CHECK(a.without(2) == UserSet({1, 3}));
    CHECK_THROWS_AS(a.without(0), std::invalid_argument);
    CHECK_THROWS_AS(UserSet({1, 1}), std::invalid_argument);
    CHECK(a.overlap({0, 1, 3}) == 2);
    CHECK(UserSet({0, 1}) < UserSet({0, 2}));
}

TEST_CASE("config validation")
{
    CHECK_THROWS_AS(SystemConfig::make(5, 5, 0, 1, 1.0, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(SystemConfig::make(5, 5, 5, 1, 1.0, 1, 1.0), ConfigError); // t = K
    CHECK_THROWS_AS(SystemConfig::make(3, 5, 1, 1, 1.0, 1, 1.0), ConfigError); // t = 5/3
    CHECK_THROWS_AS(SystemConfig::make(5, 1, 1, 1, 1.0, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(SystemConfig::make(5, 5, 1, 1, 1.0, 1, -1.0), ConfigError);
    CHECK_THROWS_AS(SystemConfig::make(5, 5, 1, 1, 0.0, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(SystemConfig::make(5, 5, 1, 1, 1.0, 0, 1.0), ConfigError);
    CHECK(SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0).caching_factor() == 1);
    CHECK(SystemConfig::make(2, 4, 1, 1, 1.0, 1, 1.0).caching_factor() == 2);
}

TEST_CASE("message sets of the reference settings")
{
    const auto five = build_message_set(SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0));
    REQUIRE(five.all.size() == 10);
    CHECK(five.all.front() == UserSet({0, 1}));
    CHECK(five.all[4] == UserSet({1, 2}));
    CHECK(five.all.back() == UserSet({3, 4}));

    const auto three = build_message_set(SystemConfig::make(3, 3, 2, 1, 1.0, 1, 1.0));
    REQUIRE(three.all.size() == 1);
    CHECK(three.all[0] == UserSet({0, 1, 2}));
    for (const auto &s : three.per_user)
        CHECK(s.size() == 1);

    CHECK(build_message_set(SystemConfig::make(6, 6, 1, 1, 1.0, 1, 1.0)).all.size() == 15);
}

TEST_CASE("message set sizes for every valid K up to 12")
{
    for (int K = 2; K <= 12; ++K)
        for (int t = 1; t <= K - 1; ++t)
        {
            const auto msgs = build_message_set(SystemConfig::make(K, K, t, 1, 1.0, 1, 1.0));
            CHECK(msgs.all.size() == pascal(K, t + 1));
            CHECK(std::is_sorted(msgs.all.begin(), msgs.all.end()));
            for (int k = 0; k < K; ++k)
            {
                const auto &sk = msgs.per_user[static_cast<std::size_t>(k)];
                CHECK(sk.size() == pascal(K - 1, t));
                for (auto idx : sk)
                    CHECK(msgs.all[idx].contains(k));
            }
            for (std::size_t j = 0; j < msgs.all.size(); ++j)
            {
                CHECK(msgs.all[j].size() == static_cast<std::size_t>(t + 1));
                CHECK(msgs.index_of(msgs.all[j]) == j);
            }
        }
}

TEST_CASE("placement holds exactly the segments whose label contains the user")
{
    std::mt19937_64 rng(1);
    const auto cfg = SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0);
    const PayloadLibrary lib(cfg, random_library(rng, 5, 100));
    const auto caches = place_caches(cfg, lib);
    for (int k = 0; k < 5; ++k)
    {
        const auto &c = caches[static_cast<std::size_t>(k)];
        CHECK(c.segments.size() == 5);
        for (std::size_t i = 0; i < 5; ++i)
        {
            const auto *seg = c.find(i, UserSet({k}));
            REQUIRE(seg != nullptr);
            const auto expect = lib.segment(i, UserSet({k}));
            CHECK(std::equal(seg->bytes.begin(), seg->bytes.end(), expect.begin(), expect.end()));
            CHECK(c.find(i, UserSet({(k + 1) % 5})) == nullptr);
        }
    }
}

TEST_CASE("t = K-1 caches everything but the complement label")
{
    std::mt19937_64 rng(2);
    const auto cfg = SystemConfig::make(4, 4, 3, 1, 1.0, 1, 1.0);
    const PayloadLibrary lib(cfg, random_library(rng, 4, 64));
    const auto caches = place_caches(cfg, lib);
    for (int k = 0; k < 4; ++k)
    {
        std::vector<int> others;
        for (int j = 0; j < 4; ++j)
            if (j != k)
                others.push_back(j);
        for (std::size_t i = 0; i < 4; ++i)
        {
            CHECK(caches[static_cast<std::size_t>(k)].find(i, UserSet(others)) == nullptr);
            for (const auto &label : lib.labels())
                if (label != UserSet(others))
                    CHECK(caches[static_cast<std::size_t>(k)].find(i, label) != nullptr);
        }
    }
}

TEST_CASE("cached bytes are the M/N share of the library")
{
    std::mt19937_64 rng(3);
    const auto cfg = SystemConfig::make(4, 4, 2, 1, 1.0, 1, 1.0);
    const PayloadLibrary lib(cfg, random_library(rng, 4, 600));
    for (const auto &c : place_caches(cfg, lib))
    {
        CHECK(c.segments.size() == 3 * 4);
        CHECK(c.total_bytes() == 2 * lib.padded_length());
    }
}

TEST_CASE("two-user message xors the cross segments")
{
    std::mt19937_64 rng(4);
    const auto cfg = SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0);
    const PayloadLibrary lib(cfg, random_library(rng, 5, 50));
    const std::vector<int> demands{0, 1, 2, 3, 4};
    const UserSet T({0, 1});
    const Bytes coded = xor_encode(T, demands, lib, 1);
    const auto a = lib.segment(0, UserSet({1}));
    const auto b = lib.segment(1, UserSet({0}));
    REQUIRE(coded.size() == lib.segment_length());
    for (std::size_t j = 0; j < coded.size(); ++j)
        CHECK(coded[j] == (a[j] ^ b[j]));

    const auto caches = place_caches(cfg, lib);
    const Bytes got = decode_user(0, T, coded, caches[0], demands);
    CHECK(std::equal(got.begin(), got.end(), a.begin(), a.end()));
}

TEST_CASE("zero payloads and zero cancellers")
{
    const auto cfg = SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0);
    std::vector<Bytes> files(5, Bytes(20, 0));
    std::mt19937_64 rng(5);
    files[2] = random_bytes(rng, 20);
    const PayloadLibrary lib(cfg, files);
    const std::vector<int> demands{0, 2, 0, 0, 0};
    const UserSet T({0, 1});
    const Bytes zero = xor_encode(UserSet({2, 3}), demands, lib, 1);
    CHECK(std::all_of(zero.begin(), zero.end(), [](std::uint8_t x) { return x == 0; }));
    // user 1 (index 1) wants file 2; the canceller V_{d_0,{1}} is all zero
    const Bytes coded = xor_encode(T, demands, lib, 1);
    const auto want = lib.segment(2, UserSet({0}));
    CHECK(std::equal(coded.begin(), coded.end(), want.begin(), want.end()));
}

TEST_CASE("encode and decode reject malformed input")
{
    std::mt19937_64 rng(6);
    const auto cfg = SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0);
    const PayloadLibrary lib(cfg, random_library(rng, 5, 10));
    const std::vector<int> demands{0, 1, 2, 3, 4};
    CHECK_THROWS_AS(xor_encode(UserSet({0, 1, 2}), demands, lib, 1), std::invalid_argument);
    CHECK_THROWS_AS(xor_encode(UserSet({0, 1}), {0, 9, 2, 3, 4}, lib, 1), std::invalid_argument);
    const auto caches = place_caches(cfg, lib);
    const Bytes coded = xor_encode(UserSet({0, 1}), demands, lib, 1);
    CHECK_THROWS_AS(decode_user(2, UserSet({0, 1}), coded, caches[2], demands), std::invalid_argument);
    // a cache that lacks the canceller is an internal inconsistency
    UserCache empty;
    empty.user = 0;
    CHECK_THROWS_AS(decode_user(0, UserSet({0, 1}), coded, empty, demands), std::logic_error);
}

TEST_CASE("every decode label is cached at the decoding user")
{
    for (int K = 2; K <= 8; ++K)
        for (int t = 1; t <= K - 1; ++t)
        {
            const auto cfg = SystemConfig::make(K, K, t, 1, 1.0, 1, 1.0);
            const auto msgs = build_message_set(cfg);
            std::vector<Bytes> files(static_cast<std::size_t>(K), Bytes(1, 0));
            const PayloadLibrary lib(cfg, files);
            const auto caches = place_caches(cfg, lib);
            for (const auto &T : msgs.all)
                for (int k : T.members())
                    for (int l : T.members())
                        if (l != k)
                            CHECK(caches[static_cast<std::size_t>(k)].find(0, T.without(l)) != nullptr);
        }
}

TEST_CASE("decode inverts encode for random payloads")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 60; ++trial)
    {
        const int K = 3 + trial % 4;
        const int t = 1 + trial % (K - 1);
        const auto cfg = SystemConfig::make(K, K, t, 1, 1.0, 1, 1.0);
        const auto msgs = build_message_set(cfg);
        const PayloadLibrary lib(cfg, random_library(rng, K, 1 + rng() % 300));
        const auto caches = place_caches(cfg, lib);
        std::vector<int> demands;
        for (int k = 0; k < K; ++k)
            demands.push_back(static_cast<int>(rng() % static_cast<unsigned>(K)));
        const auto &T = msgs.all[rng() % msgs.all.size()];
        const Bytes coded = xor_encode(T, demands, lib, t);
        for (int k : T.members())
        {
            const Bytes got = decode_user(k, T, coded, caches[static_cast<std::size_t>(k)], demands);
            const auto want = lib.segment(static_cast<std::size_t>(demands[static_cast<std::size_t>(k)]), T.without(k));
            CHECK(std::equal(got.begin(), got.end(), want.begin(), want.end()));
        }
    }
}

TEST_CASE("full round trip recovers every demanded file")
{
    std::mt19937_64 rng(8);
    const auto cfg = SystemConfig::make(5, 5, 1, 1, 1.0, 1, 1.0);
    const auto msgs = build_message_set(cfg);
    const auto files = random_library(rng, 5, 100);
    const PayloadLibrary lib(cfg, files);
    const auto caches = place_caches(cfg, lib);
    for (int trial = 0; trial < 10; ++trial)
    {
        std::vector<int> demands;
        for (int k = 0; k < 5; ++k)
            demands.push_back(static_cast<int>(rng() % 5));
        for (int k = 0; k < 5; ++k)
            CHECK(reconstruct(k, cfg, msgs, lib, caches, demands) == files[static_cast<std::size_t>(demands[k])]);
    }
}

TEST_CASE("padding round trip")
{
    std::mt19937_64 rng(9);
    const auto cfg = SystemConfig::make(6, 6, 2, 1, 1.0, 1, 1.0); // C(6,2) = 15 segments
    for (std::size_t len : {0u, 1u, 14u, 15u, 16u, 299u})
    {
        std::vector<Bytes> files = random_library(rng, 6, len);
        files[3] = random_bytes(rng, len + 7); // unequal lengths pad to the longest
        const PayloadLibrary lib(cfg, files);
        CHECK(lib.padded_length() % 15 == 0);
        CHECK(lib.padded_length() >= len + 7);
        for (std::size_t i = 0; i < 6; ++i)
        {
            std::vector<Bytes> segs;
            for (const auto &label : lib.labels())
            {
                const auto s = lib.segment(i, label);
                segs.emplace_back(s.begin(), s.end());
            }
            CHECK(PayloadLibrary::reassemble(segs, lib.original_length(i)) == files[i]);
        }
    }
}
