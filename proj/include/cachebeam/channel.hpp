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

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace cachebeam
{

/// Single-cell geometry and propagation defaults (500 m cell, 3GPP-style urban path loss).
struct CellModel
{
    double radius_km = 0.5;
    double min_distance_km = 0.01;
    double pathloss_intercept_db = 148.1;
    double pathloss_slope_db = 37.6;
    double noise_power_dbw = -134.0;
    /// h_k = 10^(-PL/exponent) h~_k. 10 reproduces the reference setup literally; 20 is the
    /// conventional amplitude convention. Scheme-vs-scheme dB gaps do not depend on it.
    int pathloss_amplitude_exponent = 10;

    void validate() const;
    double noise_power_watts() const;
};

double path_loss_db(double distance_km, const CellModel &model);

/// Counter-based stream: the n-th output is splitmix64(key + n * golden_gamma), with the key
/// derived from (master_seed, stream_index). Streams never share state, so trial i reproduces
/// the same draws whether trials run serially or concurrently.
class RandomStream
{
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_index);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();
    /// Circularly-symmetric complex Gaussian with E|z|^2 = 1.
    std::complex<double> complex_normal();

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

struct ChannelRealization
{
    std::vector<double> distances_km;
    std::vector<double> gains; // amplitude factor 10^(-PL/exponent)
    std::vector<Eigen::VectorXcd> h;

    int num_users() const { return static_cast<int>(h.size()); }
    int num_antennas() const { return h.empty() ? 0 : static_cast<int>(h.front().size()); }

    /// FNV-1a over distances, gains and channel coefficients; used to check pairing across schemes.
    std::uint64_t fingerprint() const;
};

/// Draws distances uniform-in-area over [min_distance, radius] and unit-power Rayleigh fading.
ChannelRealization sample_channel(const SystemConfig &cfg, const CellModel &model, RandomStream &stream);
ChannelRealization sample_channel(const SystemConfig &cfg, const CellModel &model, std::uint64_t master_seed,
                                  std::uint64_t stream_index);

/// Builds a realization from given distances and small-scale fading vectors.
ChannelRealization make_channel(const std::vector<double> &distances_km, const std::vector<Eigen::VectorXcd> &fading,
                                const CellModel &model);

/// Plain-text channel exchange format:
///
///     cachebeam-channel 1
///     <K> <N_t>
///     <v_1> <gain_1>
///     (re,im) (re,im) ...      <- N_t entries of h_1
///     ...                      (one distance line and one channel line per user)
///
/// Numbers are written with 17 significant digits so load(dump(x)) == x.
void dump_channel(std::ostream &os, const ChannelRealization &chan);
ChannelRealization load_channel(std::istream &is);

} // namespace cachebeam
