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

#include "cachebeam/channel.hpp"

#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cachebeam
{

namespace
{
constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;
}

void CellModel::validate() const
{
    if (!(min_distance_km > 0.0) || !(min_distance_km <= radius_km))
        throw ConfigError("cell model requires 0 < min_distance <= radius");
    if (!(pathloss_slope_db > 0.0))
        throw ConfigError("path-loss slope must be positive");
    if (pathloss_amplitude_exponent != 10 && pathloss_amplitude_exponent != 20)
        throw ConfigError("path-loss amplitude exponent must be 10 or 20");
}

double CellModel::noise_power_watts() const
{
    return std::pow(10.0, noise_power_dbw / 10.0);
}

double path_loss_db(double distance_km, const CellModel &model)
{
    if (!(distance_km > 0.0))
        throw std::invalid_argument("path_loss_db: distance must be positive");
    return model.pathloss_intercept_db + model.pathloss_slope_db * std::log10(distance_km);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += golden_gamma;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream_index)
    : key_(splitmix64(splitmix64(master_seed) ^ (stream_index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL)))
{
}

std::uint64_t RandomStream::next_u64()
{
    return splitmix64(key_ + golden_gamma * counter_++);
}

double RandomStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal()
{
    if (has_spare_)
    {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::complex<double> RandomStream::complex_normal()
{
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

std::uint64_t ChannelRealization::fingerprint() const
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    auto mix = [&](double value) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &value, sizeof(double));
        for (unsigned char b : bytes)
        {
            hash ^= b;
            hash *= 0x100000001b3ULL;
        }
    };
    for (double d : distances_km)
        mix(d);
    for (double g : gains)
        mix(g);
    for (const auto &v : h)
        for (Eigen::Index j = 0; j < v.size(); ++j)
        {
            mix(v[j].real());
            mix(v[j].imag());
        }
    return hash;
}

ChannelRealization make_channel(const std::vector<double> &distances_km, const std::vector<Eigen::VectorXcd> &fading,
                                const CellModel &model)
{
    model.validate();
    if (distances_km.size() != fading.size())
        throw std::invalid_argument("make_channel: one distance per fading vector required");
    ChannelRealization chan;
    chan.distances_km = distances_km;
    for (std::size_t k = 0; k < fading.size(); ++k)
    {
        const double pl = path_loss_db(distances_km[k], model);
        const double gain = std::pow(10.0, -pl / static_cast<double>(model.pathloss_amplitude_exponent));
        chan.gains.push_back(gain);
        chan.h.push_back(gain * fading[k]);
    }
    return chan;
}

ChannelRealization sample_channel(const SystemConfig &cfg, const CellModel &model, RandomStream &stream)
{
    model.validate();
    const double r_min2 = model.min_distance_km * model.min_distance_km;
    const double r_max2 = model.radius_km * model.radius_km;
    std::vector<double> distances;
    std::vector<Eigen::VectorXcd> fading;
    for (int k = 0; k < cfg.num_users; ++k)
    {
        const double u = stream.uniform();
        distances.push_back(std::sqrt(r_min2 + u * (r_max2 - r_min2)));
        Eigen::VectorXcd v(cfg.num_antennas);
        for (int j = 0; j < cfg.num_antennas; ++j)
            v[j] = stream.complex_normal();
        fading.push_back(std::move(v));
    }
    return make_channel(distances, fading, model);
}

ChannelRealization sample_channel(const SystemConfig &cfg, const CellModel &model, std::uint64_t master_seed,
                                  std::uint64_t stream_index)
{
    RandomStream stream(master_seed, stream_index);
    return sample_channel(cfg, model, stream);
}

void dump_channel(std::ostream &os, const ChannelRealization &chan)
{
    const auto old_precision = os.precision(17);
    os << "cachebeam-channel 1\n" << chan.num_users() << ' ' << chan.num_antennas() << '\n';
    for (int k = 0; k < chan.num_users(); ++k)
    {
        const auto uk = static_cast<std::size_t>(k);
        os << chan.distances_km.at(uk) << ' ' << chan.gains.at(uk) << '\n';
        for (Eigen::Index j = 0; j < chan.h[uk].size(); ++j)
            os << (j ? " " : "") << chan.h[uk][j];
        os << '\n';
    }
    os.precision(old_precision);
}

ChannelRealization load_channel(std::istream &is)
{
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "cachebeam-channel" || version != 1)
        throw std::runtime_error("load_channel: missing 'cachebeam-channel 1' header");
    int users = 0;
    int antennas = 0;
    if (!(is >> users >> antennas) || users <= 0 || antennas <= 0)
        throw std::runtime_error("load_channel: bad dimensions");
    ChannelRealization chan;
    for (int k = 0; k < users; ++k)
    {
        double d = 0.0;
        double g = 0.0;
        if (!(is >> d >> g))
            throw std::runtime_error("load_channel: truncated distance line for user " + std::to_string(k + 1));
        Eigen::VectorXcd v(antennas);
        for (int j = 0; j < antennas; ++j)
        {
            std::complex<double> z;
            if (!(is >> z))
                throw std::runtime_error("load_channel: truncated channel line for user " + std::to_string(k + 1));
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::runtime_error("load_channel: non-finite channel entry");
            v[j] = z;
        }
        chan.distances_km.push_back(d);
        chan.gains.push_back(g);
        chan.h.push_back(std::move(v));
    }
    return chan;
}

} // namespace cachebeam
