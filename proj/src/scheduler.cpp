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

#include "cachebeam/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace cachebeam
{

std::string to_string(SchemeKind kind)
{
    switch (kind)
    {
    case SchemeKind::greedy:
        return "greedy";
    case SchemeKind::full_superposition:
        return "fs";
    case SchemeKind::grouped:
        return "grouped";
    }
    return "unknown";
}

std::vector<std::vector<int>> compute_decode_counts(const std::vector<Slot> &slots, int num_users)
{
    std::vector<std::vector<int>> counts(slots.size(), std::vector<int>(static_cast<std::size_t>(num_users), 0));
    for (std::size_t i = 0; i < slots.size(); ++i)
        for (const auto &msg : slots[i].messages)
            for (int k : msg.members())
                ++counts[i][static_cast<std::size_t>(k)];
    return counts;
}

namespace
{

double per_message_rate(const MessageSet &msgs, double file_rate)
{
    return file_rate / static_cast<double>(binomial(msgs.num_users, msgs.caching_factor));
}

} // namespace

Schedule greedy_partition(const MessageSet &msgs, int decode_limit, double file_rate)
{
    if (decode_limit < 1)
        throw std::invalid_argument("greedy_partition: decode limit must be >= 1");
    const auto num_users = static_cast<std::size_t>(msgs.num_users);
    const double rate = per_message_rate(msgs, file_rate);

    Schedule sched;
    sched.kind = SchemeKind::greedy;
    sched.parameter = decode_limit;

    // Remaining messages, always kept in canonical order.
    std::vector<std::size_t> remaining(msgs.all.size());
    for (std::size_t j = 0; j < remaining.size(); ++j)
        remaining[j] = j;

    while (!remaining.empty())
    {
        std::vector<int> counts(num_users, 0);
        std::vector<std::size_t> candidates = remaining;
        Slot slot;

        while (!candidates.empty())
        {
            const int least = *std::min_element(counts.begin(), counts.end());
            std::vector<int> least_loaded;
            for (std::size_t k = 0; k < num_users; ++k)
                if (counts[k] == least)
                    least_loaded.push_back(static_cast<int>(k));

            // First candidate (canonical order) with maximal overlap with the least-loaded users.
            auto best = candidates.begin();
            std::size_t best_overlap = msgs.all[*best].overlap(least_loaded);
            for (auto it = std::next(candidates.begin()); it != candidates.end(); ++it)
            {
                const std::size_t ov = msgs.all[*it].overlap(least_loaded);
                if (ov > best_overlap)
                {
                    best = it;
                    best_overlap = ov;
                }
            }
            const std::size_t chosen = *best;
            candidates.erase(best);

            const UserSet &msg = msgs.all[chosen];
            const bool fits = std::all_of(msg.members().begin(), msg.members().end(), [&](int k) {
                return counts[static_cast<std::size_t>(k)] + 1 <= decode_limit;
            });
            if (!fits)
                break;
            for (int k : msg.members())
                ++counts[static_cast<std::size_t>(k)];
            slot.messages.push_back(msg);
            slot.rates.push_back(rate);
            remaining.erase(std::find(remaining.begin(), remaining.end(), chosen));
        }
        sched.slots.push_back(std::move(slot));
    }
    sched.decode_counts = compute_decode_counts(sched.slots, msgs.num_users);
    return assign_blocklengths(std::move(sched), BlocklengthMode::proportional, msgs);
}

Schedule full_superposition(const MessageSet &msgs, double file_rate)
{
    Schedule sched;
    sched.kind = SchemeKind::full_superposition;
    Slot slot;
    slot.messages = msgs.all;
    slot.rates.assign(msgs.all.size(), per_message_rate(msgs, file_rate));
    slot.blocklength_fraction = 1.0;
    sched.slots.push_back(std::move(slot));
    sched.decode_counts = compute_decode_counts(sched.slots, msgs.num_users);
    return sched;
}

Schedule grouped_baseline(const MessageSet &msgs, int group_size, double file_rate)
{
    const int K = msgs.num_users;
    const int t = msgs.caching_factor;
    if (group_size < t + 1 || group_size > K)
        throw std::invalid_argument("grouped_baseline: group size K_s = " + std::to_string(group_size) +
                                    " outside [t+1, K] = [" + std::to_string(t + 1) + ", " + std::to_string(K) + "]");
    const double appearances = static_cast<double>(binomial(K - t - 1, group_size - t - 1));
    const double rate = per_message_rate(msgs, file_rate) / appearances;

    Schedule sched;
    sched.kind = SchemeKind::grouped;
    sched.parameter = group_size;
    for (const auto &group : k_subsets(K, group_size))
    {
        Slot slot;
        for (const auto &msg : msgs.all)
            if (msg.overlap(group) == msg.size())
            {
                slot.messages.push_back(msg);
                slot.rates.push_back(rate);
            }
        sched.slots.push_back(std::move(slot));
    }
    sched.decode_counts = compute_decode_counts(sched.slots, K);
    return assign_blocklengths(std::move(sched), BlocklengthMode::equal, msgs);
}

Schedule assign_blocklengths(Schedule sched, BlocklengthMode mode, const MessageSet &msgs)
{
    const auto num_slots = static_cast<double>(sched.slots.size());
    if (mode == BlocklengthMode::equal || sched.kind == SchemeKind::grouped)
    {
        for (auto &slot : sched.slots)
            slot.blocklength_fraction = 1.0 / num_slots;
        return sched;
    }
    const auto total = static_cast<double>(msgs.all.size());
    for (auto &slot : sched.slots)
        slot.blocklength_fraction = static_cast<double>(slot.messages.size()) / total;
    return sched;
}

std::string ScheduleReport::summary() const
{
    std::ostringstream os;
    os << "B=" << num_slots << " (lower bound " << lower_bound << "), max c_k(i)=" << max_decode_count;
    if (ok())
        os << ", valid";
    else
        for (const auto &f : failures)
            os << "\n  FAIL: " << f;
    return os.str();
}

ScheduleReport validate_schedule(const Schedule &sched, const MessageSet &msgs, double file_rate, int decode_limit)
{
    ScheduleReport report;
    const int K = msgs.num_users;
    const int t = msgs.caching_factor;
    report.num_slots = sched.slots.size();
    const std::uint64_t per_user = binomial(K - 1, t);
    if (decode_limit > 0)
        report.lower_bound = static_cast<std::size_t>((per_user + static_cast<std::uint64_t>(decode_limit) - 1) /
                                                      static_cast<std::uint64_t>(decode_limit));
    else
        report.lower_bound = 1;

    auto fail = [&](const std::string &msg) { report.failures.push_back(msg); };

    if (sched.slots.empty())
        fail("schedule has no slots");

    const double target_rate = per_message_rate(msgs, file_rate);
    report.multiplicity.assign(msgs.all.size(), 0);
    std::vector<double> rate_sum(msgs.all.size(), 0.0);
    double fraction_sum = 0.0;
    for (std::size_t i = 0; i < sched.slots.size(); ++i)
    {
        const auto &slot = sched.slots[i];
        fraction_sum += slot.blocklength_fraction;
        if (!(slot.blocklength_fraction > 0.0))
            fail("slot " + std::to_string(i + 1) + " has non-positive blocklength fraction");
        if (slot.rates.size() != slot.messages.size())
            fail("slot " + std::to_string(i + 1) + " has mismatched rate list");
        auto sorted = slot.messages;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            fail("slot " + std::to_string(i + 1) + " repeats a message");
        for (std::size_t j = 0; j < slot.messages.size(); ++j)
        {
            std::size_t idx = 0;
            try
            {
                idx = msgs.index_of(slot.messages[j]);
            }
            catch (const std::invalid_argument &)
            {
                fail("slot " + std::to_string(i + 1) + " carries unknown message " + slot.messages[j].label());
                continue;
            }
            ++report.multiplicity[idx];
            const double r = j < slot.rates.size() ? slot.rates[j] : 0.0;
            if (!(r > 0.0))
                fail("message " + slot.messages[j].label() + " has non-positive rate in slot " + std::to_string(i + 1));
            rate_sum[idx] += r;
        }
    }
    if (std::abs(fraction_sum - 1.0) > 1e-9)
        fail("blocklength fractions sum to " + std::to_string(fraction_sum));

    std::size_t expected_multiplicity = 1;
    if (sched.kind == SchemeKind::grouped)
        expected_multiplicity = static_cast<std::size_t>(binomial(K - t - 1, sched.parameter - t - 1));
    for (std::size_t j = 0; j < msgs.all.size(); ++j)
    {
        if (report.multiplicity[j] == 0)
            fail("coverage: message " + msgs.all[j].label() + " is never transmitted");
        else if (report.multiplicity[j] != expected_multiplicity)
            fail("multiplicity: message " + msgs.all[j].label() + " appears " + std::to_string(report.multiplicity[j]) +
                 " times, expected " + std::to_string(expected_multiplicity));
        if (report.multiplicity[j] > 0 && std::abs(rate_sum[j] - target_rate) > 1e-9 * std::max(1.0, target_rate))
            fail("rate: message " + msgs.all[j].label() + " delivers " + std::to_string(rate_sum[j]) + ", expected " +
                 std::to_string(target_rate));
    }

    const auto counts = compute_decode_counts(sched.slots, K);
    int limit = 0;
    if (sched.kind == SchemeKind::greedy)
        limit = decode_limit;
    else if (sched.kind == SchemeKind::grouped)
        limit = static_cast<int>(binomial(sched.parameter - 1, t));
    for (std::size_t i = 0; i < counts.size(); ++i)
        for (std::size_t k = 0; k < counts[i].size(); ++k)
        {
            report.max_decode_count = std::max(report.max_decode_count, counts[i][k]);
            if (limit > 0 && counts[i][k] > limit)
                fail("decode count c_" + std::to_string(k + 1) + "(" + std::to_string(i + 1) + ") = " +
                     std::to_string(counts[i][k]) + " exceeds " + std::to_string(limit));
        }
    if (!sched.decode_counts.empty() && sched.decode_counts != counts)
        fail("stored decode counts disagree with slot contents");
    if (decode_limit > 0 && report.num_slots < report.lower_bound)
        fail("B = " + std::to_string(report.num_slots) + " below the lower bound " + std::to_string(report.lower_bound));
    return report;
}

std::string format_schedule(const Schedule &sched, const MessageSet &msgs)
{
    std::ostringstream os;
    os << "scheme " << to_string(sched.kind);
    if (sched.kind == SchemeKind::greedy)
        os << " (s=" << sched.parameter << ")";
    else if (sched.kind == SchemeKind::grouped)
        os << " (K_s=" << sched.parameter << ")";
    os << ", K=" << msgs.num_users << ", t=" << msgs.caching_factor << ", B=" << sched.slots.size() << "\n";
    const auto counts = compute_decode_counts(sched.slots, msgs.num_users);
    for (std::size_t i = 0; i < sched.slots.size(); ++i)
    {
        const auto &slot = sched.slots[i];
        os << "slot " << std::setw(3) << i + 1 << "  n_i/n=" << std::fixed << std::setprecision(4)
           << slot.blocklength_fraction << "  messages:";
        for (const auto &m : slot.messages)
            os << ' ' << m.label();
        os << "\n          c_k(i):";
        for (int c : counts[i])
            os << ' ' << c;
        os << '\n';
    }
    return os.str();
}

} // namespace cachebeam
