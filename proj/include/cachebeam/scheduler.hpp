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

#include "cachebeam/cc_core.hpp"

#include <string>
#include <vector>

namespace cachebeam
{

/// Messages carried in one time slot with their blocklength share n_i/n and rates R^T(i).
struct Slot
{
    std::vector<UserSet> messages;
    std::vector<double> rates; // parallel to `messages`, bits/s/Hz
    double blocklength_fraction = 0.0;
};

enum class SchemeKind
{
    greedy,
    full_superposition,
    grouped,
};

std::string to_string(SchemeKind kind);

enum class BlocklengthMode
{
    proportional,
    equal,
};

struct Schedule
{
    SchemeKind kind = SchemeKind::greedy;
    int parameter = 0; // s for greedy, K_s for grouped, unused for full superposition
    std::vector<Slot> slots;
    std::vector<std::vector<int>> decode_counts; // c_k(i), indexed [slot][user]

    std::size_t num_slots() const { return slots.size(); }
};

/// Greedy partition with per-user decode limit s. Each message is placed whole in one slot at
/// rate R / C(K,t); blocklengths are proportional to slot size.
Schedule greedy_partition(const MessageSet &msgs, int decode_limit, double file_rate);

/// All C(K,t+1) messages in a single slot.
Schedule full_superposition(const MessageSet &msgs, double file_rate);

/// One slot per K_s-subset U of users carrying every message T contained in U. Each message is
/// split evenly over its C(K-t-1, K_s-t-1) appearances.
Schedule grouped_baseline(const MessageSet &msgs, int group_size, double file_rate);

Schedule assign_blocklengths(Schedule sched, BlocklengthMode mode, const MessageSet &msgs);

struct ScheduleReport
{
    std::size_t num_slots = 0;
    std::size_t lower_bound = 0; // ceil(C(K-1,t) / s)
    std::vector<std::size_t> multiplicity; // appearances per message
    int max_decode_count = 0;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
    std::string summary() const;
};

/// Checks coverage, multiplicity, per-message rate accounting, blocklength sum and decode counts.
/// `decode_limit` bounds c_k(i) for greedy schedules; pass 0 to skip that check.
ScheduleReport validate_schedule(const Schedule &sched, const MessageSet &msgs, double file_rate,
                                 int decode_limit = 0);

/// Human-readable table: slot -> blocklength -> messages -> per-user decode counts.
std::string format_schedule(const Schedule &sched, const MessageSet &msgs);

/// Recomputes c_k(i) = |S(i) ∩ S_k| for every slot.
std::vector<std::vector<int>> compute_decode_counts(const std::vector<Slot> &slots, int num_users);

} // namespace cachebeam
