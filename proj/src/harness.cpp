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

#include "cachebeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace cachebeam
{

const char *const kVersion = "cachebeam 1.0.0";

namespace
{

std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

double parse_double(const std::string &key, const std::string &text)
{
    try
    {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v))
            throw std::invalid_argument(text);
        return v;
    }
    catch (const std::exception &)
    {
        throw ConfigError("option '" + key + "': '" + text + "' is not a number");
    }
}

long long parse_integer(const std::string &key, const std::string &text)
{
    try
    {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    }
    catch (const std::exception &)
    {
        throw ConfigError("option '" + key + "': '" + text + "' is not an integer");
    }
}

// Shortest text that round-trips; stable across runs and platforms.
std::string format_number(double v)
{
    char buf[64];
    for (int prec = 6; prec <= 17; ++prec)
    {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

} // namespace

SchemeSpec SchemeSpec::parse(const std::string &raw)
{
    const std::string text = trim(raw);
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    SchemeSpec spec;
    if (name == "fs")
        spec.kind = SchemeKind::full_superposition;
    else if (name == "greedy")
        spec.kind = SchemeKind::greedy;
    else if (name == "grouped")
        spec.kind = SchemeKind::grouped;
    else
        throw ConfigError("unknown scheme '" + text + "' (expected fs, greedy[:s] or grouped:K_s)");
    if (colon != std::string::npos)
    {
        if (spec.kind == SchemeKind::full_superposition)
            throw ConfigError("scheme 'fs' takes no parameter");
        const long long p = parse_integer("schemes", text.substr(colon + 1));
        if (p < 1)
            throw ConfigError("scheme parameter must be >= 1 in '" + text + "'");
        spec.parameter = static_cast<int>(p);
    }
    else if (spec.kind == SchemeKind::grouped)
        throw ConfigError("scheme 'grouped' needs a group size, e.g. grouped:3");
    return spec;
}

std::string SchemeSpec::label() const
{
    if (kind == SchemeKind::full_superposition || parameter == 0)
        return to_string(kind);
    return to_string(kind) + ":" + std::to_string(parameter);
}

std::string to_string(SweepVariable v)
{
    return v == SweepVariable::rate ? "rate" : "s";
}

SystemConfig ExperimentSpec::config_for(double sweep_value) const
{
    SystemConfig cfg = base;
    if (sweep == SweepVariable::rate)
        cfg.rate = sweep_value;
    else
    {
        if (sweep_value != std::floor(sweep_value) || sweep_value < 1.0 || sweep_value > 1e6)
            throw ConfigError("decode limit sweep value " + format_number(sweep_value) + " is not a positive integer");
        cfg.decode_limit = static_cast<int>(sweep_value);
    }
    cfg.noise_power.assign(static_cast<std::size_t>(std::max(cfg.num_users, 0)), cell.noise_power_watts());
    cfg.validate();
    return cfg;
}

Schedule ExperimentSpec::schedule_for(const SchemeSpec &scheme, const SystemConfig &cfg, const MessageSet &msgs) const
{
    switch (scheme.kind)
    {
    case SchemeKind::full_superposition:
        return assign_blocklengths(full_superposition(msgs, cfg.rate), blocklength, msgs);
    case SchemeKind::greedy:
        return assign_blocklengths(
            greedy_partition(msgs, scheme.parameter > 0 ? scheme.parameter : cfg.decode_limit, cfg.rate), blocklength,
            msgs);
    case SchemeKind::grouped:
        return assign_blocklengths(grouped_baseline(msgs, scheme.parameter, cfg.rate), blocklength, msgs);
    }
    throw std::logic_error("unknown scheme kind");
}

void ExperimentSpec::validate() const
{
    cell.validate();
    sca.validate();
    if (trials < 1)
        throw ConfigError("trials must be >= 1");
    if (values.empty())
        throw ConfigError("at least one sweep value is required");
    if (schemes.empty())
        throw ConfigError("at least one scheme is required");
    if (threads < 0)
        throw ConfigError("threads must be >= 0");
    for (double v : values)
    {
        const SystemConfig cfg = config_for(v);
        const MessageSet msgs = build_message_set(cfg);
        for (const auto &s : schemes)
        {
            try
            {
                schedule_for(s, cfg, msgs);
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError("scheme " + s.label() + ": " + e.what());
            }
        }
    }
}

void apply_setting(ExperimentSpec &spec, const std::string &raw_key, const std::string &raw_value)
{
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    auto integer = [&] { return static_cast<int>(parse_integer(key, value)); };
    auto number = [&] { return parse_double(key, value); };

    if (key == "files" || key == "N")
        spec.base.num_files = integer();
    else if (key == "users" || key == "K")
        spec.base.num_users = integer();
    else if (key == "cache" || key == "M")
        spec.base.cache_size = integer();
    else if (key == "antennas" || key == "Nt")
        spec.base.num_antennas = integer();
    else if (key == "rate" || key == "R")
        spec.base.rate = number();
    else if (key == "decode_limit" || key == "s")
        spec.base.decode_limit = integer();
    else if (key == "noise_dbw")
        spec.cell.noise_power_dbw = number();
    else if (key == "radius_km")
        spec.cell.radius_km = number();
    else if (key == "min_distance_km")
        spec.cell.min_distance_km = number();
    else if (key == "pathloss_intercept_db")
        spec.cell.pathloss_intercept_db = number();
    else if (key == "pathloss_slope_db")
        spec.cell.pathloss_slope_db = number();
    else if (key == "pathloss_amplitude_exponent")
        spec.cell.pathloss_amplitude_exponent = number();
    else if (key == "trials")
        spec.trials = integer();
    else if (key == "seed")
        spec.master_seed = static_cast<std::uint64_t>(parse_integer(key, value));
    else if (key == "threads")
        spec.threads = integer();
    else if (key == "sweep")
    {
        if (value == "rate" || value == "R")
            spec.sweep = SweepVariable::rate;
        else if (value == "s" || value == "decode_limit")
            spec.sweep = SweepVariable::decode_limit;
        else
            throw ConfigError("sweep must be 'rate' or 's'");
    }
    else if (key == "values")
    {
        spec.values.clear();
        for (const auto &v : split(value, ','))
            spec.values.push_back(parse_double(key, v));
    }
    else if (key == "schemes")
    {
        spec.schemes.clear();
        for (const auto &s : split(value, ','))
            spec.schemes.push_back(SchemeSpec::parse(s));
    }
    else if (key == "blocklength")
    {
        if (value == "proportional")
            spec.blocklength = BlocklengthMode::proportional;
        else if (value == "equal")
            spec.blocklength = BlocklengthMode::equal;
        else
            throw ConfigError("blocklength must be 'proportional' or 'equal'");
    }
    else if (key == "max_outer_iterations")
        spec.sca.max_outer_iterations = integer();
    else if (key == "power_rel_tolerance")
        spec.sca.power_rel_tolerance = number();
    else if (key == "feasibility_tolerance")
        spec.sca.feasibility_tolerance = number();
    else if (key == "initial_penalty")
        spec.sca.initial_penalty = number();
    else if (key == "penalty_growth")
        spec.sca.penalty_growth = number();
    else if (key == "penalty_cap")
        spec.sca.penalty_cap = number();
    else if (key == "subproblem_tolerance")
        spec.sca.subproblem_tolerance = number();
    else
        throw ConfigError("unknown option '" + key + "'");
}

void load_settings(ExperimentSpec &spec, std::istream &in)
{
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        apply_setting(spec, line.substr(0, eq), line.substr(eq + 1));
    }
}

TrialRecord run_trial(const ExperimentSpec &spec, double sweep_value, std::size_t trial)
{
    const SystemConfig cfg = spec.config_for(sweep_value);
    const MessageSet msgs = build_message_set(cfg);
    RandomStream stream(spec.master_seed, trial);

    TrialRecord rec;
    rec.trial = trial;
    rec.sweep_value = sweep_value;
    rec.stream_key = stream.key();
    const ChannelRealization chan = sample_channel(cfg, spec.cell, stream);
    rec.channel_fingerprint = chan.fingerprint();

    for (const auto &scheme : spec.schemes)
    {
        const Schedule sched = spec.schedule_for(scheme, cfg, msgs);
        SchemeOutcome out;
        out.scheme = scheme.label();
        out.min_margin = std::numeric_limits<double>::infinity();
        for (const auto &slot : sched.slots)
        {
            try
            {
                const SlotProblem prob = build_slot_problem(slot, msgs, chan, cfg);
                const BeamformingSolution sol = sca_solve(prob, spec.sca);
                out.slot_powers.push_back(sol.power);
                out.iterations += sol.iterations;
                out.monotonicity_violation = std::max(out.monotonicity_violation, sol.monotonicity_violation);
                switch (sol.status)
                {
                case ScaStatus::converged:
                    ++out.converged;
                    for (double m : sol.margins)
                        out.min_margin = std::min(out.min_margin, m);
                    break;
                case ScaStatus::stationary_infeasible:
                    ++out.stationary_infeasible;
                    break;
                case ScaStatus::iteration_limit:
                    ++out.iteration_limit;
                    break;
                }
            }
            catch (const NumericalError &)
            {
                out.slot_powers.push_back(std::numeric_limits<double>::quiet_NaN());
                ++out.numerical_errors;
            }
        }
        if (out.ok())
            out.power = total_average_power(sched, out.slot_powers);
        else
            out.power = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        rec.schemes.push_back(std::move(out));
    }
    return rec;
}

ResultRow aggregate(const std::vector<TrialRecord> &records, std::size_t scheme_index)
{
    ResultRow row;
    double sum = 0.0;
    for (const auto &rec : records)
    {
        const auto &out = rec.schemes.at(scheme_index);
        row.sweep_value = rec.sweep_value;
        row.scheme = out.scheme;
        if (out.ok())
        {
            sum += out.power.watts;
            ++row.trials_used;
        }
        else
            ++row.trials_failed;
    }
    row.mean_power_watts = row.trials_used ? sum / row.trials_used : std::numeric_limits<double>::quiet_NaN();
    row.mean_power_dbw = row.trials_used ? to_dbw(row.mean_power_watts) : std::numeric_limits<double>::quiet_NaN();
    return row;
}

ExperimentResult run_experiment(const ExperimentSpec &spec, const ProgressCallback &progress)
{
    spec.validate();
    const std::size_t per_value = static_cast<std::size_t>(spec.trials);
    const std::size_t total = spec.values.size() * per_value;

    ExperimentResult result;
    result.trials.assign(spec.values.size(), std::vector<TrialRecord>(per_value));

    std::size_t workers = spec.threads > 0 ? static_cast<std::size_t>(spec.threads)
                                           : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, total);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex report_mutex;
    std::exception_ptr failure;

    auto work = [&] {
        for (;;)
        {
            const std::size_t job = next.fetch_add(1);
            if (job >= total)
                return;
            const std::size_t v = job / per_value;
            const std::size_t trial = job % per_value;
            try
            {
                result.trials[v][trial] = run_trial(spec, spec.values[v], trial);
            }
            catch (...)
            {
                std::lock_guard lock(report_mutex);
                if (!failure)
                    failure = std::current_exception();
                next.store(total);
                return;
            }
            const std::size_t finished = done.fetch_add(1) + 1;
            if (progress)
            {
                std::lock_guard lock(report_mutex);
                progress(finished, total);
            }
        }
    };

    if (workers <= 1)
        work();
    else
    {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < workers; ++i)
            pool.emplace_back(work);
        for (auto &t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);

    for (const auto &records : result.trials)
        for (std::size_t s = 0; s < spec.schemes.size(); ++s)
            result.rows.push_back(aggregate(records, s));
    return result;
}

void write_csv(std::ostream &os, const ExperimentSpec &spec, const ExperimentResult &result)
{
    const auto &b = spec.base;
    const auto &c = spec.cell;
    const auto &s = spec.sca;
    os << "# " << kVersion << '\n';
    os << "# master_seed=" << spec.master_seed << " trials=" << spec.trials << " sweep=" << to_string(spec.sweep)
       << '\n';
    os << "# N=" << b.num_files << " K=" << b.num_users << " M=" << b.cache_size << " Nt=" << b.num_antennas
       << " R=" << format_number(b.rate) << " s=" << b.decode_limit
       << " blocklength=" << (spec.blocklength == BlocklengthMode::proportional ? "proportional" : "equal") << '\n';
    os << "# radius_km=" << format_number(c.radius_km) << " min_distance_km=" << format_number(c.min_distance_km)
       << " pathloss_db=" << format_number(c.pathloss_intercept_db) << "+" << format_number(c.pathloss_slope_db)
       << "*log10(d_km) pathloss_amplitude_exponent=" << format_number(c.pathloss_amplitude_exponent)
       << " noise_dbw=" << format_number(c.noise_power_dbw) << '\n';
    os << "# sca max_outer_iterations=" << s.max_outer_iterations
       << " power_rel_tolerance=" << format_number(s.power_rel_tolerance)
       << " feasibility_tolerance=" << format_number(s.feasibility_tolerance)
       << " initial_penalty=" << format_number(s.initial_penalty)
       << " penalty_growth=" << format_number(s.penalty_growth) << " penalty_cap=" << format_number(s.penalty_cap)
       << " subproblem_tolerance=" << format_number(s.subproblem_tolerance) << '\n';
    os << "sweep_value,scheme,mean_power_dbw,trials_used,trials_failed\n";
    char buf[64];
    for (const auto &row : result.rows)
    {
        if (std::isnan(row.mean_power_dbw))
            std::snprintf(buf, sizeof buf, "nan");
        else
            std::snprintf(buf, sizeof buf, "%.6f", row.mean_power_dbw);
        os << format_number(row.sweep_value) << ',' << row.scheme << ',' << buf << ',' << row.trials_used << ','
           << row.trials_failed << '\n';
    }
}

bool DecodeReport::all_ok() const
{
    return !success.empty() && std::all_of(success.begin(), success.end(), [](bool b) { return b; });
}

DecodeReport decode_demo(const SystemConfig &cfg, const std::vector<int> &demands, const std::vector<Bytes> &files)
{
    cfg.validate();
    const int t = cfg.caching_factor();
    const MessageSet msgs = build_message_set(cfg);
    const PayloadLibrary lib(cfg, files);
    const auto caches = place_caches(cfg, lib);

    std::vector<Bytes> coded;
    for (const auto &m : msgs.all)
        coded.push_back(xor_encode(m, demands, lib, t));

    DecodeReport report;
    for (int k = 0; k < cfg.num_users; ++k)
    {
        const auto file = static_cast<std::size_t>(demands[static_cast<std::size_t>(k)]);
        std::vector<Bytes> segments(lib.labels().size());
        std::vector<bool> have(lib.labels().size(), false);
        std::size_t received = 0;
        for (std::size_t idx : msgs.per_user[static_cast<std::size_t>(k)])
        {
            const UserSet &m = msgs.all[idx];
            const auto pos = lib.label_index(m.without(k));
            segments[pos] = decode_user(k, m, coded[idx], caches[static_cast<std::size_t>(k)], demands);
            have[pos] = true;
            received += coded[idx].size();
        }
        for (std::size_t pos = 0; pos < lib.labels().size(); ++pos)
        {
            if (have[pos])
                continue;
            const auto *seg = caches[static_cast<std::size_t>(k)].find(file, lib.labels()[pos]);
            if (!seg)
                throw std::logic_error("user " + std::to_string(k + 1) + " can neither decode nor find segment " +
                                       lib.labels()[pos].label());
            segments[pos] = seg->bytes;
        }
        const Bytes rebuilt = PayloadLibrary::reassemble(segments, lib.original_length(file));
        report.success.push_back(rebuilt == files[file]);
        report.bytes_received.push_back(received);
    }
    return report;
}

} // namespace cachebeam
