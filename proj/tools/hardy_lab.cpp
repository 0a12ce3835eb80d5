#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hardy/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<hardy::ExperimentConfig> load(const std::string& path)
{
    auto cfgs = hardy::load_config(path);
    if (const char* env = std::getenv("HARDY_LAB_SEED")) {
        auto seed = std::uint64_t(hardy::detail::to_long("HARDY_LAB_SEED", env));
        for (auto& c : cfgs) c.seed = seed;
    }
    return cfgs;
}

int emit(const std::vector<hardy::ReportRow>& rows, const std::string& out)
{
    fs::create_directories(out);
    std::ofstream csv(fs::path(out) / "report.csv");
    hardy::write_csv(csv, rows);
    std::ofstream summary(fs::path(out) / "summary.txt");
    hardy::write_summary(summary, rows);
    hardy::write_summary(std::cout, rows);
    for (const auto& r : rows)
        if (!r.pass) return 1;
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hardy-lab: characterization constants and best-constant searches for iterated Hardy inequalities"};
    app.require_subcommand(1);

    std::string config, out = ".", param, values;
    int jobs = 1;
    bool fail_fast = false;

    auto* run = app.add_subcommand("run", "run every experiment of a config file");
    run->add_option("config", config, "config file")->required();
    run->add_option("--out", out, "output directory for report.csv and summary.txt");
    run->add_flag("--fail-fast", fail_fast, "stop after the first failing experiment");
    run->add_option("--jobs", jobs, "experiments run concurrently")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "rerun a config for each value of one numeric field");
    sweep->add_option("config", config, "config file")->required();
    sweep->add_option("--param", param, "field name")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();
    sweep->add_option("--out", out, "output directory");
    sweep->add_option("--jobs", jobs, "experiments run concurrently")->check(CLI::PositiveNumber);

    std::string wdesc = "const 1";
    double a = 0.0, b = 1.0;
    int depth = 20;
    auto* seq = app.add_subcommand("sequence", "print the discretizing sequence of a weight as CSV");
    seq->add_option("--w", wdesc, "weight descriptor");
    seq->add_option("--a", a, "left end");
    seq->add_option("--b", b, "right end");
    seq->add_option("--depth", depth, "truncation depth");

    CLI11_PARSE(app, argc, argv);

    if (*seq) {
        try {
            auto ds = hardy::build_discretizing_sequence(hardy::Weight::parse(wdesc), hardy::Interval(a, b), depth);
            hardy::write_sequence_csv(std::cout, ds);
            return 0;
        } catch (const hardy::Error& e) {
            std::cerr << "hardy-lab: " << e.what() << '\n';
            return 2;
        }
    }

    try {
        auto cfgs = load(config);
        hardy::RunOptions ro{jobs, fail_fast};
        if (*run) return emit(hardy::run_campaign(cfgs, ro), out);

        std::vector<hardy::ReportRow> rows;
        std::stringstream ss(values);
        std::string v;
        std::vector<std::vector<hardy::ExperimentConfig>> sets;
        std::vector<std::string> vals;
        while (std::getline(ss, v, ',')) {
            v = hardy::detail::trim(v);
            if (v.empty()) continue;
            sets.push_back(hardy::with_param(cfgs, param, v));
            vals.push_back(v);
        }
        for (std::size_t i = 0; i < sets.size(); ++i)
            for (auto& r : hardy::run_campaign(sets[i], ro)) {
                r.param = param;
                r.param_value = vals[i];
                rows.push_back(std::move(r));
            }
        return emit(rows, out);
    } catch (const hardy::Error& e) {
        std::cerr << "hardy-lab: " << e.what() << '\n';
        return 2;
    }
}
