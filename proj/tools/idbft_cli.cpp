// Scenario-driven command line: run one scenario, run a suite directory,
// explore the reliable-broadcast adversary tree, or show the partition demo.
// Exit codes: 0 pass, 1 property failure, 2 input error, 3 resource cap.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "idbft/sim/explore.hpp"
#include "idbft/sim/report.hpp"

namespace fs = std::filesystem;
using namespace idbft;
using namespace idbft::sim;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitResourceCap = 3;

struct RunOutcome {
    int exit_code = kExitPass;
    std::string summary;
};

RunOutcome run_one(const fs::path& path, std::optional<std::uint64_t> seed_override,
                   std::string out_path, std::string trace_path) {
    RunOutcome outcome;
    nlohmann::json doc;
    Scenario scenario;
    try {
        std::ifstream in(path);
        if (!in) throw ScenarioError("cannot open " + path.string());
        in >> doc;
        scenario = scenario_from_json(doc);
        if (seed_override) scenario.seed = *seed_override;
        if (out_path.empty()) out_path = scenario_output_path(doc);
    } catch (const std::exception& e) {
        outcome.exit_code = kExitInputError;
        outcome.summary = std::string("input error: ") + e.what();
        return outcome;
    }

    try {
        auto started = std::chrono::steady_clock::now();
        nlohmann::ordered_json report;
        bool pass = true;
        std::string trace;
        if (scenario.protocol == Protocol::PartitionDemo) {
            PartitionReport demo = run_partition_demo(scenario);
            report = make_partition_report(scenario, demo);
            outcome.summary = describe(demo);
        } else {
            RunResult run = run_scenario(scenario);
            report = make_report(scenario, run);
            pass = run.verdict.all_pass();
            if (!trace_path.empty()) trace = dump_trace(run.truth);
            for (const PropertyResult& p : run.verdict.properties) {
                outcome.summary += p.name + (p.pass ? ": pass" : ": FAIL (" + p.witness + ")");
                outcome.summary += "\n";
            }
        }
        auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
        outcome.summary += "wall_time_ms: " + std::to_string(elapsed) + "\n";
        if (!out_path.empty()) {
            std::ofstream out(out_path);
            out << report.dump(2) << "\n";
        }
        if (!trace_path.empty()) {
            std::ofstream out(trace_path);
            out << trace;
        }
        if (!pass) outcome.exit_code = kExitPropertyFailure;
    } catch (const ScenarioError& e) {
        outcome.exit_code = kExitInputError;
        outcome.summary = std::string("input error: ") + e.what();
    } catch (const std::exception& e) {
        outcome.exit_code = kExitInputError;
        outcome.summary = std::string("run aborted: ") + e.what();
    }
    return outcome;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"id-only Byzantine agreement protocol simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_path;
    std::string trace_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    auto* run_cmd = app.add_subcommand("run", "run one scenario file");
    run_cmd->add_option("file", scenario_path, "scenario JSON")->required();
    run_cmd->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
    run_cmd->add_option("--out", out_path, "write the JSON report here");
    run_cmd->add_option("--trace", trace_path, "write the delivery trace here");

    std::string suite_dir;
    int jobs = 1;
    auto* suite_cmd = app.add_subcommand("suite", "run every scenario in a directory");
    suite_cmd->add_option("dir", suite_dir, "directory of scenario files")->required();
    suite_cmd->add_option("--jobs", jobs, "parallel scenario runs")->default_val(1);

    int ex_n = 4;
    int ex_f = 1;
    int ex_horizon = 8;
    bool correct_sender = false;
    bool expect_violations = false;
    auto* explore_cmd = app.add_subcommand("explore", "exhaustive rb adversary search");
    explore_cmd->add_option("--n", ex_n, "total nodes (<= 5)");
    explore_cmd->add_option("--f", ex_f, "byzantine nodes");
    explore_cmd->add_option("--horizon", ex_horizon, "rounds to explore (<= 8)");
    explore_cmd->add_flag("--correct-sender", correct_sender,
                          "designated sender is correct (default: Byzantine)");
    explore_cmd->add_flag("--expect-violations", expect_violations,
                          "negative control: succeed when violations are found");

    int block_size = 4;
    int cross_delay = 40;
    std::string demo_out;
    auto* demo_cmd = app.add_subcommand("demo", "exhibits");
    auto* partition_cmd = demo_cmd->add_subcommand("partition", "asynchrony counterexample");
    partition_cmd->add_option("--block-size", block_size, "nodes per block");
    partition_cmd->add_option("--cross-delay", cross_delay,
                              "rounds a cross-block message is delayed");
    partition_cmd->add_option("--out", demo_out, "write the JSON report here");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        auto outcome = run_one(scenario_path,
                               seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt,
                               out_path, trace_path);
        std::cout << outcome.summary;
        std::cout << (outcome.exit_code == kExitPass ? "PASS" : "FAIL") << "\n";
        return outcome.exit_code;
    }

    if (suite_cmd->parsed()) {
        std::vector<fs::path> files;
        std::error_code ec;
        for (const auto& entry : fs::directory_iterator(suite_dir, ec)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        if (ec) {
            std::cerr << "cannot read directory " << suite_dir << "\n";
            return kExitInputError;
        }
        if (files.empty()) {
            std::cerr << "no scenario files in " << suite_dir << "\n";
            return kExitInputError;
        }
        std::sort(files.begin(), files.end());

        struct Row {
            std::string name;
            int exit_code = 0;
            bool expected_fail = false;
            bool ok = false;
        };
        std::vector<Row> rows(files.size());
        std::mutex mu;
        std::size_t next = 0;
        auto worker = [&]() {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= files.size()) return;
                    i = next++;
                }
                Row row;
                row.name = files[i].filename().string();
                bool expect_fail = false;
                try {
                    std::ifstream in(files[i]);
                    nlohmann::json doc;
                    in >> doc;
                    expect_fail = doc.value("expect_fail", false);
                } catch (...) {
                }
                auto outcome = run_one(files[i], std::nullopt, "", "");
                row.exit_code = outcome.exit_code;
                row.expected_fail = expect_fail;
                row.ok = expect_fail ? outcome.exit_code == kExitPropertyFailure
                                     : outcome.exit_code == kExitPass;
                rows[i] = row;
            }
        };
        int workers = std::max(1, jobs);
        std::vector<std::thread> pool;
        for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        bool all_ok = true;
        for (const Row& row : rows) {
            std::cout << (row.ok ? "PASS  " : "FAIL  ") << row.name
                      << (row.expected_fail ? "  (expected failure)" : "") << "\n";
            all_ok = all_ok && row.ok;
        }
        return all_ok ? kExitPass : kExitPropertyFailure;
    }

    if (explore_cmd->parsed()) {
        ExploreParams params;
        params.n = ex_n;
        params.f = ex_f;
        params.horizon = ex_horizon;
        params.byz_sender = !correct_sender;
        ExploreResult res = explore_rb(params);
        if (res.refused) {
            std::cout << "refused: schedule-tree estimate " << res.estimate
                      << " beyond the configured cap\n";
            return kExitResourceCap;
        }
        std::cout << "transitions: " << res.transitions << "\n";
        std::cout << "distinct states: " << res.states << "\n";
        std::cout << "correctness violations: " << res.correctness_violations << "\n";
        std::cout << "unforgeability violations: " << res.unforgeability_violations
                  << "\n";
        std::cout << "relay violations: " << res.relay_violations << "\n";
        bool ok = expect_violations ? res.total_violations() > 0
                                    : res.total_violations() == 0;
        std::cout << (ok ? "PASS" : "FAIL") << "\n";
        return ok ? kExitPass : kExitPropertyFailure;
    }

    if (partition_cmd->parsed()) {
        Scenario s;
        s.protocol = Protocol::PartitionDemo;
        s.cross_delay = cross_delay;
        for (int i = 0; i < block_size; ++i) {
            s.nodes.push_back(NodeSpec{NodeId{10 + (std::uint64_t)i}, false,
                                       Value::of(1), {}, std::nullopt, std::nullopt});
            s.nodes.push_back(NodeSpec{NodeId{50 + (std::uint64_t)i}, false,
                                       Value::of(0), {}, std::nullopt, std::nullopt});
        }
        try {
            PartitionReport report = run_partition_demo(s);
            std::cout << describe(report);
            if (!demo_out.empty()) {
                std::ofstream out(demo_out);
                out << make_partition_report(s, report).dump(2) << "\n";
            }
        } catch (const std::exception& e) {
            std::cerr << "demo failed: " << e.what() << "\n";
            return kExitInputError;
        }
        return kExitPass;
    }
    return kExitInputError;
}
