// qlm command-line runner. Links the shared library through its C API only.
//
//   qlm run   --config cfg.json --out results/ [--seed N --trials N ...]
//   qlm sweep --config cfg.json --out results/ --axis epsilon --values 0.05,0.1
//   qlm demo  lb-dep --out results/ [--h N --eps E --phases N --seeds N]
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlm.h"

namespace fs = std::filesystem;

namespace {

int exit_code_for(qlm_status status) {
    switch (status) {
        case QLM_OK:
            return 0;
        case QLM_ERR_CONFIG:
        case QLM_ERR_INVALID_ARGUMENT:
        case QLM_ERR_PARAMETER_OUT_OF_RANGE:
        case QLM_ERR_MODE_MISMATCH:
        case QLM_ERR_INFEASIBLE_SCHEDULE:
            return 1;
        default:
            return 2;
    }
}

[[nodiscard]] int report_failure(const char* what, qlm_status status) {
    std::cerr << "error (" << qlm_status_name(status) << ") in " << what << ": "
              << qlm_last_error() << "\n";
    return exit_code_for(status);
}

// Atomic publish: write to a temp sibling, then rename over the target.
void write_file_atomic(const fs::path& path, const std::string& content) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string());
        f << content;
        if (!f.good()) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read config file " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct ScenarioHandle {
    qlm_scenario* ptr = nullptr;
    ~ScenarioHandle() { qlm_scenario_free(ptr); }
};
struct SummaryHandle {
    qlm_summary* ptr = nullptr;
    ~SummaryHandle() { qlm_summary_free(ptr); }
};
struct ReportHandle {
    qlm_demo_report* ptr = nullptr;
    ~ReportHandle() { qlm_demo_report_free(ptr); }
};

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "qlm-out";
    std::string seed, trials, threads, eps, h, horizon;
    std::int64_t trajectories = 0;
};

int load_scenario_text(const std::string& text, const std::string& base_dir,
                       const CommonOpts& opts, ScenarioHandle& scenario) {
    qlm_status st = qlm_scenario_parse(text.c_str(), base_dir.c_str(), &scenario.ptr);
    if (st != QLM_OK) return report_failure("config", st);

    const std::pair<const char*, const std::string*> overrides[] = {
        {"seed", &opts.seed},     {"trials", &opts.trials}, {"threads", &opts.threads},
        {"epsilon", &opts.eps},   {"h", &opts.h},           {"horizon", &opts.horizon},
    };
    for (const auto& [field, value] : overrides) {
        if (value->empty()) continue;
        st = qlm_scenario_override(scenario.ptr, field, value->c_str());
        if (st != QLM_OK) return report_failure("override", st);
    }
    return 0;
}

int load_scenario(const CommonOpts& opts, ScenarioHandle& scenario) {
    std::string text;
    try {
        text = read_file(opts.config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::string base_dir = fs::path(opts.config_path).parent_path().string();
    return load_scenario_text(text, base_dir, opts, scenario);
}

int run_one(const ScenarioHandle& scenario, const fs::path& out_dir, const std::string& label,
            std::string* summary_row) {
    SummaryHandle summary;
    qlm_status st = qlm_run_experiment(scenario.ptr, qlm_scenario_trials(scenario.ptr),
                                       qlm_scenario_seed(scenario.ptr),
                                       qlm_scenario_threads(scenario.ptr), &summary.ptr);
    if (st != QLM_OK) return report_failure("experiment", st);

    const char* csv = nullptr;
    const char* jsonl = nullptr;
    const char* meta = nullptr;
    qlm_summary_csv(summary.ptr, &csv);
    qlm_summary_trials_jsonl(summary.ptr, &jsonl);
    qlm_summary_meta_json(summary.ptr, &meta);
    try {
        if (summary_row) {
            // Caller assembles the combined sweep CSV; relabel our row.
            std::string row(csv);
            std::size_t nl = row.find('\n');
            std::string data = row.substr(nl + 1);
            *summary_row = label + data.substr(data.find(','));
        } else {
            write_file_atomic(out_dir / "summary.csv", csv);
            write_file_atomic(out_dir / "trials.jsonl", jsonl);
            write_file_atomic(out_dir / "meta.json", meta);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "ratio_mean=" << qlm_summary_mean(summary.ptr, "ratio")
              << " alg_mean=" << qlm_summary_mean(summary.ptr, "alg")
              << " opt_mean=" << qlm_summary_mean(summary.ptr, "opt")
              << " pings_per_packet=" << qlm_summary_mean(summary.ptr, "pings_per_packet")
              << " trials=" << qlm_summary_num_trials(summary.ptr) << "\n";
    return 0;
}

int dump_trajectories(const ScenarioHandle& scenario, const fs::path& out_dir,
                      std::int64_t count) {
    for (std::int64_t i = 0; i < count; ++i) {
        uint64_t seed = qlm_scenario_seed(scenario.ptr) + static_cast<uint64_t>(i);
        char* csv = nullptr;
        qlm_status st = qlm_trial_trajectory_csv(scenario.ptr, seed, &csv);
        if (st != QLM_OK) return report_failure("trajectory", st);
        std::unique_ptr<char, decltype(&qlm_string_free)> owned(csv, &qlm_string_free);
        try {
            write_file_atomic(out_dir / ("trajectory-" + std::to_string(seed) + ".csv"),
                              owned.get());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 0;
}

int cmd_run(const CommonOpts& opts) {
    ScenarioHandle scenario;
    if (int rc = load_scenario(opts, scenario)) return rc;
    if (int rc = run_one(scenario, opts.out_dir, "run", nullptr)) return rc;
    if (opts.trajectories > 0)
        if (int rc = dump_trajectories(scenario, opts.out_dir, opts.trajectories)) return rc;
    std::cout << "wrote " << (fs::path(opts.out_dir) / "summary.csv").string() << ", trials.jsonl, meta.json\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& axis, const std::string& values_csv) {
    if (axis != "epsilon" && axis != "h" && axis != "policy") {
        std::cerr << "error: sweep axis must be epsilon, h, or policy\n";
        return 1;
    }
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(item);
    }
    if (values.empty()) {
        std::cerr << "error: sweep needs a non-empty --values list\n";
        return 1;
    }

    std::string combined;
    std::string base_dir = fs::path(opts.config_path).parent_path().string();
    for (std::size_t i = 0; i < values.size(); ++i) {
        ScenarioHandle scenario;
        CommonOpts local = opts;
        std::string text;
        try {
            text = read_file(local.config_path);
            if (axis == "policy") {
                // Policy is not an override field: rewrite the config text,
                // carrying the estimator that pairs with it.
                nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
                j["policy"] = values[i];
                if (values[i] == "pico") j["estimator"] = "pico";
                else if (values[i] == "poa_arr") j["estimator"] = "hold";
                else if (values[i] == "poa_dep") j["estimator"] = "extrapolating";
                text = j.dump();
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
        if (axis == "epsilon") local.eps = values[i];
        else if (axis == "h") local.h = values[i];
        if (int rc = load_scenario_text(text, base_dir, local, scenario)) return rc;
        std::string row;
        std::cout << axis << "=" << values[i] << ": ";
        if (int rc = run_one(scenario, opts.out_dir, values[i], &row)) return rc;
        combined += row;
    }
    try {
        std::string header = "value,n_trials,opt_mean,opt_se,alg_mean,alg_se,ratio_mean,ratio_se,"
                             "ping_count_mean,ping_count_se,pings_per_packet_mean,"
                             "pings_per_packet_se,lag_sum_mean,lag_sum_se,under_area_mean,"
                             "under_area_se,over_area_mean,over_area_se\n";
        write_file_atomic(fs::path(opts.out_dir) / "sweep.csv", header + combined);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << "wrote " << (fs::path(opts.out_dir) / "sweep.csv").string() << "\n";
    return 0;
}

int cmd_demo(const std::string& name, const std::string& out_dir, const std::string& params) {
    ReportHandle report;
    qlm_status st = qlm_demo_run(name.c_str(), params.c_str(), &report.ptr);
    if (st != QLM_OK) return report_failure("demo", st);
    const char* csv = nullptr;
    const char* verdict = nullptr;
    qlm_demo_report_csv(report.ptr, &csv);
    qlm_demo_report_verdict(report.ptr, &verdict);
    try {
        write_file_atomic(fs::path(out_dir) / ("demo-" + name + ".csv"), csv);
        write_file_atomic(fs::path(out_dir) / ("demo-" + name + ".txt"),
                          std::string(verdict) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << verdict << "\n";
    return qlm_demo_report_pass(report.ptr) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized queue-length monitoring simulator"};
    app.set_version_flag("--version", qlm_version());
    // `--h` is a real option here, so keep help on `--help` only.
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        cmd->set_help_flag("--help", "print help");
        if (needs_config)
            cmd->add_option("--config", opts.config_path, "scenario config JSON")->required();
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--seed", opts.seed, "override base seed");
        cmd->add_option("--trials", opts.trials, "override trial count");
        cmd->add_option("--threads", opts.threads, "cap worker threads");
        cmd->add_option("--eps", opts.eps, "override epsilon");
        cmd->add_option("--h", opts.h, "override instance height parameter");
        cmd->add_option("--horizon", opts.horizon, "override horizon");
    };

    CLI::App* run = app.add_subcommand("run", "run one experiment");
    add_common(run, true);
    run->add_option("--trajectories", opts.trajectories,
                    "also write per-step trajectories for the first N seeds");

    CLI::App* sweep = app.add_subcommand("sweep", "run an experiment per axis value");
    add_common(sweep, true);
    std::string axis, values;
    sweep->add_option("--axis", axis, "epsilon | h | policy")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();

    CLI::App* demo = app.add_subcommand("demo", "run a named demonstration");
    demo->set_help_flag("--help", "print help");
    std::string demo_name;
    demo->add_option("name", demo_name, "lb-dep | lb-arr | poa-insufficiency | eg1 | eg3")
        ->required();
    demo->add_option("--out", opts.out_dir, "output directory");
    std::string d_h, d_eps, d_phases, d_steps, d_seeds, d_seed, d_threads;
    demo->add_option("--h", d_h);
    demo->add_option("--eps", d_eps);
    demo->add_option("--phases", d_phases);
    demo->add_option("--steps", d_steps);
    demo->add_option("--seeds", d_seeds);
    demo->add_option("--seed", d_seed);
    demo->add_option("--threads", d_threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // bad flags are configuration errors
    }

    if (run->parsed()) return cmd_run(opts);
    if (sweep->parsed()) return cmd_sweep(opts, axis, values);
    if (demo->parsed()) {
        nlohmann::json params = nlohmann::json::object();
        if (!d_h.empty()) params["h"] = std::stoll(d_h);
        if (!d_eps.empty()) params["eps"] = d_eps;
        if (!d_phases.empty()) params["phases"] = std::stoll(d_phases);
        if (!d_steps.empty()) params["steps"] = std::stoll(d_steps);
        if (!d_seeds.empty()) params["seeds"] = std::stoll(d_seeds);
        if (!d_seed.empty()) params["seed"] = std::stoull(d_seed);
        if (!d_threads.empty()) params["threads"] = std::stoll(d_threads);
        return cmd_demo(demo_name, opts.out_dir, params.dump());
    }
    return 0;
}
