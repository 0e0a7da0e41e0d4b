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

#pragma once

#include "cachebeam/beamformer.hpp"
#include "cachebeam/cc_core.hpp"
#include "cachebeam/channel.hpp"
#include "cachebeam/scheduler.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace cachebeam
{

extern const char *const kVersion;

/// A delivery scheme to evaluate. For greedy, parameter 0 means "use the config's decode limit",
/// which is what an s-sweep varies.
struct SchemeSpec
{
    SchemeKind kind = SchemeKind::full_superposition;
    int parameter = 0;

    /// "fs", "greedy", "greedy:2", "grouped:3"
    static SchemeSpec parse(const std::string &text);
    std::string label() const;
};

enum class SweepVariable
{
    rate,
    decode_limit,
};

std::string to_string(SweepVariable v);

struct ExperimentSpec
{
    SystemConfig base = SystemConfig::make(5, 5, 1, 6, 10.0, 2, CellModel{}.noise_power_watts());
    CellModel cell;
    SweepVariable sweep = SweepVariable::rate;
    std::vector<double> values{10.0};
    std::vector<SchemeSpec> schemes{SchemeSpec::parse("fs"), SchemeSpec::parse("greedy"),
                                    SchemeSpec::parse("grouped:3")};
    int trials = 1000;
    std::uint64_t master_seed = 1;
    BlocklengthMode blocklength = BlocklengthMode::proportional;
    ScaSettings sca;
    int threads = 0; // 0: one per hardware thread. Never affects results.

    /// Throws ConfigError on an unusable spec (including any sweep value invalid for the config).
    void validate() const;
    SystemConfig config_for(double sweep_value) const;
    Schedule schedule_for(const SchemeSpec &scheme, const SystemConfig &cfg, const MessageSet &msgs) const;
};

/// Sets one key=value option; throws ConfigError for unknown keys or malformed values.
void apply_setting(ExperimentSpec &spec, const std::string &key, const std::string &value);

/// Reads key=value lines ('#' starts a comment) into spec.
void load_settings(ExperimentSpec &spec, std::istream &in);

struct SchemeOutcome
{
    std::string scheme;
    int converged = 0;
    int stationary_infeasible = 0;
    int iteration_limit = 0;
    int numerical_errors = 0;
    std::vector<double> slot_powers; // watts, NaN for slots whose solve threw
    AveragePower power;              // valid only when ok()
    int iterations = 0;
    double monotonicity_violation = 0.0;
    double min_margin = 0.0; // over converged slots

    int failed_slots() const { return stationary_infeasible + iteration_limit + numerical_errors; }
    bool ok() const { return failed_slots() == 0; }
};

struct TrialRecord
{
    std::size_t trial = 0;
    double sweep_value = 0.0;
    std::uint64_t stream_key = 0;
    std::uint64_t channel_fingerprint = 0;
    std::vector<SchemeOutcome> schemes;
};

/// One trial: channel from stream (master_seed, trial), identical for every scheme and sweep value.
TrialRecord run_trial(const ExperimentSpec &spec, double sweep_value, std::size_t trial);

struct ResultRow
{
    double sweep_value = 0.0;
    std::string scheme;
    double mean_power_watts = 0.0;
    double mean_power_dbw = 0.0; // NaN when no trial succeeded
    int trials_used = 0;
    int trials_failed = 0;
};

struct ExperimentResult
{
    std::vector<ResultRow> rows;                  // value-major, schemes in spec order
    std::vector<std::vector<TrialRecord>> trials; // [sweep value][trial]
};

/// Mean of watts over successful trials, then converted to dBW.
ResultRow aggregate(const std::vector<TrialRecord> &records, std::size_t scheme_index);

using ProgressCallback = std::function<void(std::size_t done, std::size_t total)>;

/// Trials run concurrently; the reduction is sequential in trial order so the output does not
/// depend on the thread count.
ExperimentResult run_experiment(const ExperimentSpec &spec, const ProgressCallback &progress = {});

/// Header lines prefixed '#', then sweep_value,scheme,mean_power_dbw,trials_used,trials_failed.
void write_csv(std::ostream &os, const ExperimentSpec &spec, const ExperimentResult &result);

struct DecodeReport
{
    std::vector<bool> success; // per user
    std::vector<std::size_t> bytes_received;
    bool all_ok() const;
};

/// Placement, encoding of every message and decoding at every user, compared byte for byte.
DecodeReport decode_demo(const SystemConfig &cfg, const std::vector<int> &demands, const std::vector<Bytes> &files);

} // namespace cachebeam
