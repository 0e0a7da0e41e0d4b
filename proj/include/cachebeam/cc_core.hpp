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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachebeam
{

/// Raised for inconsistent system dimensions (non-integer caching factor, bad noise vector, ...).
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// C(n, k) with C(n, k) = 0 for k < 0 or k > n.
std::uint64_t binomial(int n, int k);

/// All k-subsets of {0, ..., n-1} as sorted index lists, in lexicographic order.
std::vector<std::vector<int>> k_subsets(int n, int k);

/// Set of user indices (0-based internally, printed 1-based). Members are kept sorted,
/// so the defaulted comparison is the canonical lexicographic message order.
class UserSet
{
public:
    UserSet() = default;
    explicit UserSet(std::vector<int> members);

    const std::vector<int> &members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    bool contains(int user) const;

    /// Copy of this set with one member removed; throws if absent.
    UserSet without(int user) const;

    /// Number of members shared with a sorted index list.
    std::size_t overlap(const std::vector<int> &sorted_users) const;

    /// "{1,2,5}" with 1-based labels.
    std::string label() const;

    auto operator<=>(const UserSet &) const = default;
    bool operator==(const UserSet &) const = default;

private:
    std::vector<int> members_;
};

struct SystemConfig
{
    int num_files = 0;     // N
    int num_users = 0;     // K
    int cache_size = 0;    // M, in files
    int num_antennas = 1;  // N_t
    double rate = 1.0;     // R, bits/s/Hz per file
    int decode_limit = 1;  // s
    std::vector<double> noise_power; // sigma_k^2 in watts, one per user

    /// t = M K / N, valid only after validate().
    int caching_factor() const;

    /// Throws ConfigError unless t = MK/N is an integer in [1, K-1], noise powers are
    /// positive (one per user) and the remaining dimensions are positive.
    void validate() const;

    /// Convenience constructor; fills a uniform noise vector and validates.
    static SystemConfig make(int num_files, int num_users, int cache_size, int num_antennas, double rate,
                             int decode_limit, double noise_power_watts);
};

/// The coded multicast messages: every (t+1)-subset of users, in canonical order.
struct MessageSet
{
    int num_users = 0;
    int caching_factor = 0;
    std::vector<UserSet> all;                  // S
    std::vector<std::vector<std::size_t>> per_user; // S_k as indices into `all`

    std::size_t index_of(const UserSet &message) const;

private:
    friend MessageSet build_message_set(const SystemConfig &cfg);
    std::map<UserSet, std::size_t> lookup_;
};

MessageSet build_message_set(const SystemConfig &cfg);

using Bytes = std::vector<std::uint8_t>;

/// Library of N files, each split into C(K,t) equal segments labelled by t-subsets.
/// Files are zero-padded to a common length divisible by C(K,t); original lengths are kept.
class PayloadLibrary
{
public:
    PayloadLibrary(const SystemConfig &cfg, std::vector<Bytes> files);

    std::size_t num_files() const { return padded_.size(); }
    std::size_t padded_length() const { return padded_length_; }
    std::size_t segment_length() const { return segment_length_; }
    std::size_t original_length(std::size_t file) const { return original_lengths_.at(file); }
    const std::vector<UserSet> &labels() const { return labels_; }

    std::span<const std::uint8_t> segment(std::size_t file, const UserSet &label) const;
    std::size_t label_index(const UserSet &label) const;

    /// Concatenates segments (in label order) and strips padding.
    static Bytes reassemble(const std::vector<Bytes> &segments, std::size_t original_length);

private:
    std::vector<Bytes> padded_;
    std::vector<std::size_t> original_lengths_;
    std::size_t padded_length_ = 0;
    std::size_t segment_length_ = 0;
    std::vector<UserSet> labels_;
    std::map<UserSet, std::size_t> label_lookup_;
};

struct CachedSegment
{
    std::size_t file = 0;
    UserSet label;
    Bytes bytes;
};

struct UserCache
{
    int user = 0;
    std::vector<CachedSegment> segments;

    /// nullptr when (file, label) is not cached here.
    const CachedSegment *find(std::size_t file, const UserSet &label) const;
    std::size_t total_bytes() const;
};

/// User k stores V_{i,G} for every file i and every label G containing k.
std::vector<UserCache> place_caches(const SystemConfig &cfg, const PayloadLibrary &lib);

/// XOR over k in T of V_{d_k, T\{k}}.
Bytes xor_encode(const UserSet &message, const std::vector<int> &demands, const PayloadLibrary &lib,
                 int caching_factor);

/// Recovers V_{d_k, T\{k}} at user k by cancelling the t cached segments V_{d_l, T\{l}}.
Bytes decode_user(int user, const UserSet &message, std::span<const std::uint8_t> coded, const UserCache &cache,
                  const std::vector<int> &demands);

} // namespace cachebeam
