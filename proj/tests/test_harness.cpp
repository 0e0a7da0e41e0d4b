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

#include "cachebeam/harness.hpp"

#include <cmath>
#include <sstream>

using namespace cachebeam;

namespace
{

ExperimentSpec small_spec()
{
    ExperimentSpec spec;
    std::istringstream in("# small, fast\n"
                          "K=3\nN=3\nM=1\nNt=3\nR=2\ns=1\n"
                          "trials = 4\n"
                          "schemes=fs,greedy,grouped:2\n"
                          "values=1,2\n"
                          "seed=5\n");
    load_settings(spec, in);
    return spec;
}

std::string csv_of(const ExperimentSpec &spec)
{
    std::ostringstream os;
    write_csv(os, spec, run_experiment(spec));
    return os.str();
}

Bytes random_file(RandomStream &rng, std::size_t size)
{
    Bytes f(size);
    for (auto &b : f)
        b = static_cast<std::uint8_t>(rng.next_u64() & 0xff);
    return f;
}

} // namespace

TEST_CASE("scheme parsing")
{
    CHECK(SchemeSpec::parse("fs").kind == SchemeKind::full_superposition);
    CHECK(SchemeSpec::parse("greedy").parameter == 0);
    CHECK(SchemeSpec::parse("greedy:3").parameter == 3);
    CHECK(SchemeSpec::parse("grouped:4").kind == SchemeKind::grouped);
    for (const char *label : {"fs", "greedy", "greedy:2", "grouped:3"})
        CHECK(SchemeSpec::parse(label).label() == label);
    for (const char *bad : {"", "fs:1", "grouped", "greedy:0", "greedy:x", "mystery", "grouped:-2"})
        CHECK_THROWS_AS(SchemeSpec::parse(bad), ConfigError);
}

TEST_CASE("settings")
{
    ExperimentSpec spec;
    apply_setting(spec, " K ", " 6 ");
    apply_setting(spec, "sweep", "s");
    apply_setting(spec, "values", "1,2,3");
    apply_setting(spec, "noise_dbw", "-120");
    apply_setting(spec, "max_outer_iterations", "80");
    apply_setting(spec, "blocklength", "equal");
    CHECK(spec.base.num_users == 6);
    CHECK(spec.sweep == SweepVariable::decode_limit);
    CHECK(spec.values == std::vector<double>{1, 2, 3});
    CHECK(spec.cell.noise_power_dbw == -120.0);
    CHECK(spec.sca.max_outer_iterations == 80);
    CHECK(spec.blocklength == BlocklengthMode::equal);
    CHECK(to_string(spec.sweep) == "s");

    CHECK_THROWS_AS(apply_setting(spec, "colour", "blue"), ConfigError);
    CHECK_THROWS_AS(apply_setting(spec, "K", "six"), ConfigError);
    CHECK_THROWS_AS(apply_setting(spec, "K", "6.5"), ConfigError);
    CHECK_THROWS_AS(apply_setting(spec, "R", "1e"), ConfigError);
    CHECK_THROWS_AS(apply_setting(spec, "sweep", "power"), ConfigError);
    CHECK_THROWS_AS(apply_setting(spec, "blocklength", "long"), ConfigError);

    std::istringstream bad("K=5\njust words\n");
    CHECK_THROWS_AS(load_settings(spec, bad), ConfigError);
}

TEST_CASE("spec validation")
{
    CHECK_NOTHROW(small_spec().validate());

    auto spec = small_spec();
    spec.trials = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = small_spec();
    spec.base.cache_size = 3; // t = K leaves nothing to deliver
    CHECK_THROWS(spec.validate());

    spec = small_spec();
    spec.schemes = {SchemeSpec::parse("grouped:5")};
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = small_spec();
    spec.sweep = SweepVariable::decode_limit;
    spec.values = {1.5};
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = small_spec();
    spec.values.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = small_spec();
    spec.sca.feasibility_tolerance = 0.0;
    CHECK_THROWS(spec.validate());
}

TEST_CASE("a trial is reproducible and shares its channel")
{
    const auto spec = small_spec();
    const auto a = run_trial(spec, 1.0, 2);
    const auto b = run_trial(spec, 1.0, 2);
    const auto c = run_trial(spec, 2.0, 2);
    const auto d = run_trial(spec, 1.0, 3);
    CHECK(a.channel_fingerprint == b.channel_fingerprint);
    CHECK(a.channel_fingerprint == c.channel_fingerprint);
    CHECK(a.channel_fingerprint != d.channel_fingerprint);
    CHECK(a.stream_key == c.stream_key);
    REQUIRE(a.schemes.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
    {
        CHECK(a.schemes[s].scheme == b.schemes[s].scheme);
        CHECK(a.schemes[s].slot_powers == b.schemes[s].slot_powers);
        CHECK(a.schemes[s].iterations == b.schemes[s].iterations);
        CHECK(a.schemes[s].ok());
        CHECK(a.schemes[s].min_margin >= -1e-6);
    }
    // higher rate costs power on the same channel
    for (std::size_t s = 0; s < 3; ++s)
        CHECK(c.schemes[s].power.watts > a.schemes[s].power.watts);
}

TEST_CASE("single cell experiment gives a single row")
{
    auto spec = small_spec();
    spec.values = {2.0};
    spec.schemes = {SchemeSpec::parse("fs")};
    spec.trials = 1;
    const auto result = run_experiment(spec);
    REQUIRE(result.rows.size() == 1);
    CHECK(result.rows[0].scheme == "fs");
    CHECK(result.rows[0].trials_used + result.rows[0].trials_failed == 1);
    const auto direct = run_trial(spec, 2.0, 0);
    CHECK(result.trials[0][0].schemes[0].slot_powers == direct.schemes[0].slot_powers);
}

TEST_CASE("aggregation averages watts before converting")
{
    auto spec = small_spec();
    spec.threads = 2;
    const auto result = run_experiment(spec);
    REQUIRE(result.rows.size() == 6);
    std::size_t row = 0;
    for (std::size_t v = 0; v < 2; ++v)
        for (std::size_t s = 0; s < 3; ++s, ++row)
        {
            double sum = 0.0;
            int used = 0;
            for (const auto &rec : result.trials[v])
                if (rec.schemes[s].ok())
                {
                    sum += rec.schemes[s].power.watts;
                    ++used;
                }
            const auto &r = result.rows[row];
            CHECK(r.sweep_value == spec.values[v]);
            CHECK(r.scheme == spec.schemes[s].label());
            CHECK(r.trials_used == used);
            CHECK(r.trials_used + r.trials_failed == spec.trials);
            REQUIRE(used > 0);
            CHECK(r.mean_power_dbw == doctest::Approx(10.0 * std::log10(sum / used)).epsilon(1e-12));
        }

    // a failed trial is excluded and counted
    auto records = result.trials[0];
    records[1].schemes[0].iteration_limit = 1;
    const auto r = aggregate(records, 0);
    CHECK(r.trials_failed == result.rows[0].trials_failed + (result.trials[0][1].schemes[0].ok() ? 1 : 0));
}

TEST_CASE("csv layout and independence from the thread count")
{
    auto spec = small_spec();
    spec.threads = 1;
    const std::string one = csv_of(spec);
    spec.threads = 3;
    const std::string three = csv_of(spec);
    CHECK(one == three);
    CHECK(one == csv_of(spec));

    std::istringstream lines(one);
    std::string line;
    std::getline(lines, line);
    CHECK(line == std::string("# ") + kVersion);
    int comments = 1, rows = 0;
    bool header = false;
    while (std::getline(lines, line))
    {
        if (line.rfind("#", 0) == 0)
        {
            CHECK_FALSE(header);
            ++comments;
        }
        else if (!header)
        {
            CHECK(line == "sweep_value,scheme,mean_power_dbw,trials_used,trials_failed");
            header = true;
        }
        else
            ++rows;
    }
    CHECK(comments >= 4);
    CHECK(rows == 6);
    CHECK(one.find("master_seed=5") != std::string::npos);
    CHECK(one.find("\n1,greedy,") != std::string::npos);
    CHECK(one.find("\n2,grouped:2,") != std::string::npos);
}

TEST_CASE("decode demo on the worked example")
{
    const auto cfg = SystemConfig::make(5, 5, 1, 6, 1.0, 2, 1.0);
    RandomStream rng(1, 0);
    std::vector<Bytes> files;
    for (int n = 0; n < 5; ++n)
        files.push_back(random_file(rng, 500));

    const auto distinct = decode_demo(cfg, {0, 1, 2, 3, 4}, files);
    CHECK(distinct.all_ok());
    REQUIRE(distinct.bytes_received.size() == 5);
    for (auto b : distinct.bytes_received)
        CHECK(b == 4 * 100); // four messages of one segment each

    const auto same = decode_demo(cfg, {2, 2, 2, 2, 2}, files);
    CHECK(same.all_ok());
}

TEST_CASE("decode demo with two-fold caching and random demands")
{
    const auto cfg = SystemConfig::make(6, 6, 2, 6, 1.0, 1, 1.0);
    RandomStream rng(8, 1);
    std::vector<Bytes> files;
    for (int n = 0; n < 6; ++n)
        files.push_back(random_file(rng, 1024));
    for (int rep = 0; rep < 5; ++rep)
    {
        std::vector<int> demands;
        for (int k = 0; k < 6; ++k)
            demands.push_back(static_cast<int>(rng.next_u64() % 6));
        CHECK(decode_demo(cfg, demands, files).all_ok());
    }
    CHECK_THROWS(decode_demo(cfg, {0, 1}, files));
}
