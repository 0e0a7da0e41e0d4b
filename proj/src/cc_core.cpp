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

#include "cachebeam/cc_core.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace cachebeam
{

std::uint64_t binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i)
        result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return result;
}

std::vector<std::vector<int>> k_subsets(int n, int k)
{
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n)
        return out;
    std::vector<int> current(static_cast<std::size_t>(k));
    std::iota(current.begin(), current.end(), 0);
    while (true)
    {
        out.push_back(current);
        int pos = k - 1;
        while (pos >= 0 && current[static_cast<std::size_t>(pos)] == n - k + pos)
            --pos;
        if (pos < 0)
            break;
        ++current[static_cast<std::size_t>(pos)];
        for (int j = pos + 1; j < k; ++j)
            current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

UserSet::UserSet(std::vector<int> members) : members_(std::move(members))
{
    std::sort(members_.begin(), members_.end());
    if (std::adjacent_find(members_.begin(), members_.end()) != members_.end())
        throw std::invalid_argument("UserSet: duplicate member");
    if (!members_.empty() && members_.front() < 0)
        throw std::invalid_argument("UserSet: negative user index");
}

bool UserSet::contains(int user) const
{
    return std::binary_search(members_.begin(), members_.end(), user);
}

UserSet UserSet::without(int user) const
{
    if (!contains(user))
        throw std::invalid_argument("UserSet::without: user " + std::to_string(user + 1) + " not in " + label());
    std::vector<int> rest;
    rest.reserve(members_.size() - 1);
    for (int m : members_)
        if (m != user)
            rest.push_back(m);
    return UserSet(std::move(rest));
}

std::size_t UserSet::overlap(const std::vector<int> &sorted_users) const
{
    std::size_t count = 0;
    auto a = members_.begin();
    auto b = sorted_users.begin();
    while (a != members_.end() && b != sorted_users.end())
    {
        if (*a < *b)
            ++a;
        else if (*b < *a)
            ++b;
        else
        {
            ++count;
            ++a;
            ++b;
        }
    }
    return count;
}

std::string UserSet::label() const
{
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < members_.size(); ++i)
        os << (i ? "," : "") << members_[i] + 1;
    os << '}';
    return os.str();
}

int SystemConfig::caching_factor() const
{
    return cache_size * num_users / num_files;
}

void SystemConfig::validate() const
{
    if (num_files <= 0 || num_users <= 0 || cache_size <= 0)
        throw ConfigError("N, K and M must be positive");
    if (num_antennas <= 0)
        throw ConfigError("number of antennas must be positive");
    if (decode_limit <= 0)
        throw ConfigError("decode limit s must be positive");
    if (!(rate > 0.0))
        throw ConfigError("rate R must be positive");
    if ((cache_size * num_users) % num_files != 0)
        throw ConfigError("caching factor t = MK/N = " + std::to_string(cache_size) + "*" + std::to_string(num_users) +
                          "/" + std::to_string(num_files) + " is not an integer");
    const int t = caching_factor();
    if (t < 1 || t > num_users - 1)
        throw ConfigError("caching factor t = " + std::to_string(t) + " outside [1, K-1]");
    if (noise_power.size() != static_cast<std::size_t>(num_users))
        throw ConfigError("expected one noise power per user");
    for (double sigma : noise_power)
        if (!(sigma > 0.0))
            throw ConfigError("noise powers must be positive");
}

SystemConfig SystemConfig::make(int num_files, int num_users, int cache_size, int num_antennas, double rate,
                                int decode_limit, double noise_power_watts)
{
    SystemConfig cfg;
    cfg.num_files = num_files;
    cfg.num_users = num_users;
    cfg.cache_size = cache_size;
    cfg.num_antennas = num_antennas;
    cfg.rate = rate;
    cfg.decode_limit = decode_limit;
    cfg.noise_power.assign(static_cast<std::size_t>(std::max(num_users, 0)), noise_power_watts);
    cfg.validate();
    return cfg;
}

std::size_t MessageSet::index_of(const UserSet &message) const
{
    auto it = lookup_.find(message);
    if (it == lookup_.end())
        throw std::invalid_argument("unknown message " + message.label());
    return it->second;
}

MessageSet build_message_set(const SystemConfig &cfg)
{
    cfg.validate();
    MessageSet msgs;
    msgs.num_users = cfg.num_users;
    msgs.caching_factor = cfg.caching_factor();
    msgs.per_user.resize(static_cast<std::size_t>(cfg.num_users));
    for (auto &members : k_subsets(cfg.num_users, msgs.caching_factor + 1))
    {
        const std::size_t index = msgs.all.size();
        for (int k : members)
            msgs.per_user[static_cast<std::size_t>(k)].push_back(index);
        msgs.all.emplace_back(std::move(members));
        msgs.lookup_.emplace(msgs.all.back(), index);
    }
    return msgs;
}

PayloadLibrary::PayloadLibrary(const SystemConfig &cfg, std::vector<Bytes> files)
{
    cfg.validate();
    if (files.size() != static_cast<std::size_t>(cfg.num_files))
        throw std::invalid_argument("PayloadLibrary: expected " + std::to_string(cfg.num_files) + " files, got " +
                                    std::to_string(files.size()));
    for (auto &members : k_subsets(cfg.num_users, cfg.caching_factor()))
    {
        labels_.emplace_back(std::move(members));
        label_lookup_.emplace(labels_.back(), labels_.size() - 1);
    }
    const std::size_t num_segments = labels_.size();

    std::size_t longest = 0;
    for (const auto &f : files)
        longest = std::max(longest, f.size());
    segment_length_ = (longest + num_segments - 1) / num_segments;
    padded_length_ = segment_length_ * num_segments;

    for (auto &f : files)
    {
        original_lengths_.push_back(f.size());
        f.resize(padded_length_, 0);
    }
    padded_ = std::move(files);
}

std::size_t PayloadLibrary::label_index(const UserSet &label) const
{
    auto it = label_lookup_.find(label);
    if (it == label_lookup_.end())
        throw std::invalid_argument("no subfile labelled " + label.label());
    return it->second;
}

std::span<const std::uint8_t> PayloadLibrary::segment(std::size_t file, const UserSet &label) const
{
    const auto &bytes = padded_.at(file);
    return std::span<const std::uint8_t>(bytes).subspan(label_index(label) * segment_length_, segment_length_);
}

Bytes PayloadLibrary::reassemble(const std::vector<Bytes> &segments, std::size_t original_length)
{
    Bytes out;
    for (const auto &s : segments)
        out.insert(out.end(), s.begin(), s.end());
    if (original_length > out.size())
        throw std::invalid_argument("reassemble: original length exceeds segment total");
    out.resize(original_length);
    return out;
}

const CachedSegment *UserCache::find(std::size_t file, const UserSet &label) const
{
    for (const auto &seg : segments)
        if (seg.file == file && seg.label == label)
            return &seg;
    return nullptr;
}

std::size_t UserCache::total_bytes() const
{
    std::size_t total = 0;
    for (const auto &seg : segments)
        total += seg.bytes.size();
    return total;
}

std::vector<UserCache> place_caches(const SystemConfig &cfg, const PayloadLibrary &lib)
{
    cfg.validate();
    std::vector<UserCache> caches(static_cast<std::size_t>(cfg.num_users));
    for (int k = 0; k < cfg.num_users; ++k)
    {
        auto &cache = caches[static_cast<std::size_t>(k)];
        cache.user = k;
        for (std::size_t file = 0; file < lib.num_files(); ++file)
            for (const auto &label : lib.labels())
                if (label.contains(k))
                {
                    auto seg = lib.segment(file, label);
                    cache.segments.push_back({file, label, Bytes(seg.begin(), seg.end())});
                }
    }
    return caches;
}

namespace
{

void check_demands(const std::vector<int> &demands, const UserSet &message, std::size_t num_files)
{
    for (int k : message.members())
    {
        if (static_cast<std::size_t>(k) >= demands.size())
            throw std::invalid_argument("no demand for user " + std::to_string(k + 1));
        const int d = demands[static_cast<std::size_t>(k)];
        if (d < 0 || (num_files && static_cast<std::size_t>(d) >= num_files))
            throw std::invalid_argument("demand of user " + std::to_string(k + 1) + " is not a valid file index");
    }
}

} // namespace

Bytes xor_encode(const UserSet &message, const std::vector<int> &demands, const PayloadLibrary &lib,
                 int caching_factor)
{
    if (message.size() != static_cast<std::size_t>(caching_factor + 1))
        throw std::invalid_argument("xor_encode: message " + message.label() + " must have t+1 = " +
                                    std::to_string(caching_factor + 1) + " members");
    check_demands(demands, message, lib.num_files());
    Bytes coded(lib.segment_length(), 0);
    for (int k : message.members())
    {
        auto seg = lib.segment(static_cast<std::size_t>(demands[static_cast<std::size_t>(k)]), message.without(k));
        for (std::size_t b = 0; b < coded.size(); ++b)
            coded[b] ^= seg[b];
    }
    return coded;
}

Bytes decode_user(int user, const UserSet &message, std::span<const std::uint8_t> coded, const UserCache &cache,
                  const std::vector<int> &demands)
{
    if (!message.contains(user))
        throw std::invalid_argument("decode_user: user " + std::to_string(user + 1) + " is not in " + message.label());
    check_demands(demands, message, 0);
    Bytes out(coded.begin(), coded.end());
    for (int other : message.members())
    {
        if (other == user)
            continue;
        const auto file = static_cast<std::size_t>(demands[static_cast<std::size_t>(other)]);
        const CachedSegment *seg = cache.find(file, message.without(other));
        if (seg == nullptr)
            throw std::logic_error("placement inconsistency: user " + std::to_string(user + 1) + " lacks V_{" +
                                   std::to_string(file + 1) + "," + message.without(other).label() + "}");
        if (seg->bytes.size() != out.size())
            throw std::logic_error("cached segment length mismatch");
        for (std::size_t b = 0; b < out.size(); ++b)
            out[b] ^= seg->bytes[b];
    }
    return out;
}

} // namespace cachebeam
