#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkdsim/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qkdsim::config_error("config error: cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_theta_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
            if (pos != item.size()) throw std::invalid_argument(item);
            values.push_back(v);
        } catch (const std::exception&) {
            throw qkdsim::config_error("config error: bad theta value '" + item + "'");
        }
    }
    if (values.empty()) throw qkdsim::config_error("config error: empty theta list");
    return values;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qkdsim: Monte Carlo simulator for two-qubit-subspace QKD under "
                 "collective unitary channel noise"};
    app.set_version_flag("--version", "qkdsim 0.1.0");
    app.require_subcommand(0, 1);

    std::string config_path, out_path, format;
    std::uint64_t seed = 0;
    bool seed_set = false;

    CLI::App* simulate = app.add_subcommand("simulate", "Run one experiment from a config file");
    simulate->add_option("--config", config_path, "Path to the JSON config")->required();
    simulate->add_option("--seed", seed, "Override the config seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    simulate->add_option("--out", out_path, "Write the report here instead of stdout");
    simulate->add_option("--format", format, "Report format: structured or csv")
        ->check(CLI::IsMember({"structured", "csv"}));

    std::string theta_list;
    CLI::App* sweep = app.add_subcommand("sweep", "Run the base config once per theta value");
    sweep->add_option("--config", config_path, "Path to the base JSON config")->required();
    sweep->add_option("--theta", theta_list, "Comma-separated theta values (radians)")
        ->required();
    sweep->add_option("--out", out_path, "Write the CSV table here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (simulate->parsed()) {
            qkdsim::ExperimentConfig cfg = qkdsim::parse_config(read_file(config_path));
            if (seed_set) cfg.seed = seed;
            if (!out_path.empty()) cfg.output.path = out_path;
            if (format == "csv") cfg.output.format = qkdsim::ReportFormat::Csv;
            if (format == "structured") cfg.output.format = qkdsim::ReportFormat::Structured;
            const qkdsim::RunReport report = qkdsim::run_experiment(cfg);
            if (cfg.output.path.empty()) {
                if (cfg.output.format == qkdsim::ReportFormat::Csv)
                    std::cout << qkdsim::kCsvHeader << "\n"
                              << qkdsim::report_to_csv_row(report) << "\n";
                else
                    std::cout << qkdsim::report_to_json(report);
            }
            return 0;
        }
        if (sweep->parsed()) {
            qkdsim::SweepSpec spec;
            spec.base = qkdsim::parse_config(read_file(config_path));
            spec.values = parse_theta_list(theta_list);
            const auto rows = qkdsim::run_sweep(spec);
            emit(out_path, qkdsim::sweep_to_csv(rows));
            return 0;
        }
        std::cerr << app.help();
        return 2;
    } catch (const qkdsim::config_error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const qkdsim::insufficient_data_error& e) {
        std::cerr << "insufficient data: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
