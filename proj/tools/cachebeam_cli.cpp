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

// cachebeam command line: schedule | solve | experiment | decode-demo

#include "cachebeam/harness.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace cachebeam;

namespace
{

struct Common
{
    std::string config_path;
    std::vector<std::string> settings;
};

void add_common(CLI::App *app, Common &common)
{
    app->add_option("-c,--config", common.config_path, "key=value settings file")->check(CLI::ExistingFile);
    app->add_option("--set", common.settings, "override one setting, e.g. --set K=6 (repeatable)");
}

ExperimentSpec make_spec(const Common &common)
{
    ExperimentSpec spec;
    if (!common.config_path.empty())
    {
        std::ifstream in(common.config_path);
        if (!in)
            throw std::runtime_error("cannot read " + common.config_path);
        load_settings(spec, in);
    }
    for (const auto &kv : common.settings)
    {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_setting(spec, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return spec;
}

SystemConfig base_config(const ExperimentSpec &spec)
{
    return spec.config_for(spec.sweep == SweepVariable::rate ? spec.base.rate : spec.base.decode_limit);
}

std::string with_slot_suffix(const std::string &path, std::size_t slot, std::size_t num_slots)
{
    if (num_slots == 1)
        return path;
    const auto dot = path.find_last_of('.');
    const auto sep = path.find_last_of('/');
    const std::string tag = ".slot" + std::to_string(slot + 1);
    if (dot == std::string::npos || (sep != std::string::npos && dot < sep))
        return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

int cmd_schedule(const Common &common, const std::string &scheme_text)
{
    const ExperimentSpec spec = make_spec(common);
    const SystemConfig cfg = base_config(spec);
    const MessageSet msgs = build_message_set(cfg);
    const SchemeSpec scheme = SchemeSpec::parse(scheme_text);
    const Schedule sched = spec.schedule_for(scheme, cfg, msgs);
    std::cout << format_schedule(sched, msgs);
    const auto report = validate_schedule(sched, msgs, cfg.rate, scheme.kind == SchemeKind::greedy ? sched.parameter : 0);
    std::cout << report.summary() << '\n';
    return report.ok() ? 0 : 3;
}

int cmd_solve(const Common &common, const std::string &scheme_text, std::size_t trial, const std::string &channel_in,
              const std::string &channel_out, const std::string &trace_path)
{
    const ExperimentSpec spec = make_spec(common);
    spec.cell.validate();
    const SystemConfig cfg = base_config(spec);
    const MessageSet msgs = build_message_set(cfg);
    const SchemeSpec scheme = SchemeSpec::parse(scheme_text);
    const Schedule sched = spec.schedule_for(scheme, cfg, msgs);

    ChannelRealization chan;
    if (!channel_in.empty())
    {
        std::ifstream in(channel_in);
        if (!in)
            throw std::runtime_error("cannot read " + channel_in);
        chan = load_channel(in);
        if (chan.num_users() != cfg.num_users || chan.num_antennas() != cfg.num_antennas)
            throw ConfigError("channel file dimensions do not match K and Nt");
    }
    else
        chan = sample_channel(cfg, spec.cell, spec.master_seed, trial);
    if (!channel_out.empty())
    {
        std::ofstream out(channel_out);
        dump_channel(out, chan);
        if (!out)
            throw std::runtime_error("cannot write " + channel_out);
    }

    std::vector<double> powers;
    bool all_converged = true;
    std::cout << std::setprecision(6);
    for (std::size_t i = 0; i < sched.slots.size(); ++i)
    {
        const SlotProblem prob = build_slot_problem(sched.slots[i], msgs, chan, cfg);
        const BeamformingSolution sol = sca_solve(prob, spec.sca);
        const MarginReport margins = verify_solution(sol.beamformers, prob);
        powers.push_back(sol.power);
        all_converged = all_converged && sol.converged();
        std::cout << "slot " << i + 1 << ": " << sched.slots[i].messages.size() << " messages, "
                  << prob.num_constraints() << " constraints, status " << to_string(sol.status) << ", "
                  << sol.iterations << " iterations, power " << sol.power << " W (" << to_dbw(sol.power)
                  << " dBW), min margin " << margins.min_margin << '\n';
        if (!trace_path.empty())
        {
            const std::string path = with_slot_suffix(trace_path, i, sched.slots.size());
            std::ofstream out(path);
            write_trace_csv(out, sol.trace);
            if (!out)
                throw std::runtime_error("cannot write " + path);
        }
    }
    const AveragePower p = total_average_power(sched, powers);
    std::cout << "average power " << p.watts << " W (" << p.dbw << " dBW)" << (all_converged ? "" : " [not converged]")
              << '\n';
    return all_converged ? 0 : 4;
}

int cmd_experiment(const Common &common, const std::string &out_path, bool progress)
{
    const ExperimentSpec spec = make_spec(common);
    spec.validate();
    std::ofstream file;
    if (!out_path.empty())
    {
        file.open(out_path);
        if (!file)
            throw std::runtime_error("cannot write " + out_path);
    }
    ProgressCallback cb;
    if (progress)
        cb = [](std::size_t done, std::size_t total) {
            std::cerr << "\r" << done << "/" << total << " trials" << (done == total ? "\n" : "") << std::flush;
        };
    const ExperimentResult result = run_experiment(spec, cb);
    std::ostream &os = out_path.empty() ? std::cout : file;
    write_csv(os, spec, result);
    os.flush();
    if (!os)
        throw std::runtime_error("writing results failed");
    return 0;
}

int cmd_decode_demo(const Common &common, std::vector<int> demands, std::size_t file_size, std::uint64_t seed)
{
    const ExperimentSpec spec = make_spec(common);
    const SystemConfig cfg = base_config(spec);
    if (demands.empty())
        for (int k = 0; k < cfg.num_users; ++k)
            demands.push_back(k % cfg.num_files + 1);
    if (static_cast<int>(demands.size()) != cfg.num_users)
        throw ConfigError("expected " + std::to_string(cfg.num_users) + " demands");
    for (auto &d : demands)
    {
        if (d < 1 || d > cfg.num_files)
            throw ConfigError("demands are file numbers 1.." + std::to_string(cfg.num_files));
        --d;
    }
    std::vector<Bytes> files;
    for (int n = 0; n < cfg.num_files; ++n)
    {
        RandomStream stream(seed, static_cast<std::uint64_t>(n));
        Bytes f(file_size);
        for (auto &b : f)
            b = static_cast<std::uint8_t>(stream.next_u64() >> 56);
        files.push_back(std::move(f));
    }
    const DecodeReport report = decode_demo(cfg, demands, files);
    for (std::size_t k = 0; k < report.success.size(); ++k)
        std::cout << "user " << k + 1 << " file " << demands[k] + 1 << ": " << (report.success[k] ? "ok" : "MISMATCH")
                  << " (" << report.bytes_received[k] << " coded bytes received)\n";
    return report.all_ok() ? 0 : 5;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Cache-aided multi-antenna delivery: schedules, beamforming and Monte Carlo experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;

    auto *schedule = app.add_subcommand("schedule", "print and validate a delivery schedule");
    std::string schedule_scheme = "greedy";
    add_common(schedule, common);
    schedule->add_option("--scheme", schedule_scheme, "fs, greedy[:s] or grouped:K_s");

    auto *solve = app.add_subcommand("solve", "solve every slot of one schedule on one channel");
    std::string solve_scheme = "greedy";
    std::size_t trial = 0;
    std::string channel_in, channel_out, trace;
    add_common(solve, common);
    solve->add_option("--scheme", solve_scheme, "fs, greedy[:s] or grouped:K_s");
    solve->add_option("--trial", trial, "channel stream index under the master seed");
    solve->add_option("--channel", channel_in, "read the channel from a file instead of sampling");
    solve->add_option("--dump-channel", channel_out, "write the channel used");
    solve->add_option("--trace", trace, "per-iteration CSV (one file per slot)");

    auto *experiment = app.add_subcommand("experiment", "Monte Carlo sweep, CSV output");
    std::string out_path;
    bool progress = false;
    add_common(experiment, common);
    experiment->add_option("-o,--out", out_path, "CSV path (default: stdout)");
    experiment->add_flag("--progress", progress, "report finished trials on stderr");

    auto *demo = app.add_subcommand("decode-demo", "placement, XOR delivery and decoding, checked byte for byte");
    std::vector<int> demands;
    std::size_t file_size = 1024;
    std::uint64_t demo_seed = 1;
    add_common(demo, common);
    demo->add_option("--demands", demands, "file number per user, 1-based")->delimiter(',');
    demo->add_option("--size", file_size, "bytes per file");
    demo->add_option("--seed", demo_seed, "payload seed");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (schedule->parsed())
            return cmd_schedule(common, schedule_scheme);
        if (solve->parsed())
            return cmd_solve(common, solve_scheme, trial, channel_in, channel_out, trace);
        if (experiment->parsed())
            return cmd_experiment(common, out_path, progress);
        if (demo->parsed())
            return cmd_decode_demo(common, demands, file_size, demo_seed);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
