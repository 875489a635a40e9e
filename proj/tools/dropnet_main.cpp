#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dropnet/config.hpp"
#include "dropnet/metrics.hpp"
#include "dropnet/runner.hpp"

namespace {

struct SeedRange {
    uint64_t lo = 0;
    uint64_t hi = 0;
};

std::optional<SeedRange> parse_seed_range(const std::string& s) {
    const size_t dots = s.find("..");
    if (dots == std::string::npos) return std::nullopt;
    SeedRange r;
    try {
        size_t used = 0;
        r.lo = std::stoull(s.substr(0, dots), &used);
        if (used != dots) return std::nullopt;
        const std::string hi = s.substr(dots + 2);
        r.hi = std::stoull(hi, &used);
        if (used != hi.size()) return std::nullopt;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (r.hi < r.lo) return std::nullopt;
    return r;
}

void print_batch_summary(const std::vector<dropnet::Report>& reports, const std::string& name,
                         const std::string& out_dir) {
    std::printf("ran %zu seeds of %s into %s\n", reports.size(), name.c_str(), out_dir.c_str());
    for (const auto& report : reports) {
        const auto& w = report.write.total;
        const auto& r = report.read.total;
        std::printf("  seed %llu: write %llu/%llu read %llu/%llu\n",
                    static_cast<unsigned long long>(report.seed),
                    static_cast<unsigned long long>(w.delivered),
                    static_cast<unsigned long long>(w.created),
                    static_cast<unsigned long long>(r.delivered),
                    static_cast<unsigned long long>(r.created));
    }
    std::printf("aggregate means in %s/aggregate.csv\n", out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dropnet: dead-drop messaging over an opportunistic network, simulated"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 0;
    std::string seeds_spec;
    bool trace = false;

    CLI::App* run = app.add_subcommand("run", "execute a scenario and write report files");
    run->add_option("--config", config_path, "scenario config file")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "seed override (default World.seed)");
    CLI::Option* seeds_opt =
        run->add_option("--seeds", seeds_spec, "batch over seeds A..B, with aggregate.csv");
    seed_opt->excludes(seeds_opt);
    seeds_opt->excludes(seed_opt);
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_flag("--trace", trace, "also write a trace.csv event log");

    std::vector<std::string> dirs;
    CLI::App* compare = app.add_subcommand("compare", "diff the mean metrics of two report trees");
    compare->add_option("dirs", dirs, "two directories holding report.csv sets")
        ->expected(2)
        ->required();

    app.add_subcommand("scenarios", "print the bundled scenario configs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;  // bad usage is a config error
    }

    try {
        if (run->parsed()) {
            dropnet::ScenarioConfig cfg = dropnet::parse_config(config_path);
            if (!seeds_spec.empty()) {
                auto range = parse_seed_range(seeds_spec);
                if (!range) throw dropnet::ConfigError("--seeds wants A..B with A <= B");
                auto reports = dropnet::run_batch(cfg, range->lo, range->hi, out_dir, trace);
                print_batch_summary(reports, cfg.name, out_dir);
            } else {
                const uint64_t s = seed_opt->count() > 0 ? seed : cfg.seed;
                dropnet::Report report = dropnet::run_single(cfg, s, out_dir, trace);
                std::cout << dropnet::report_text(report);
            }
        } else if (compare->parsed()) {
            dropnet::compare_dirs(dirs[0], dirs[1], std::cout);
        } else {
            std::cout << "# bundled scenario1\n"
                      << dropnet::serialize_config(dropnet::bundled_scenario1()) << '\n'
                      << "# bundled scenario2\n"
                      << dropnet::serialize_config(dropnet::bundled_scenario2());
        }
        return 0;
    } catch (const dropnet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
