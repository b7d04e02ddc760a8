// Command-line front end: cluster, bench, calibrate and export.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shallowtree/shallowtree.hpp"

namespace st = shallowtree;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDegenerate = 4;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "30" means seeds 0..29, "1,5,7" (any comma) an explicit list.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    auto to_u64 = [](const std::string& s) {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) {
            throw UsageError("invalid seed '" + s + "'");
        }
        return static_cast<std::uint64_t>(v);
    };
    try {
        if (text.find(',') == std::string::npos) {
            const auto count = to_u64(text);
            if (count == 0) {
                throw UsageError("--seeds needs at least one seed");
            }
            for (std::uint64_t s = 0; s < count; ++s) {
                seeds.push_back(s);
            }
            return seeds;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) {
                seeds.push_back(to_u64(item));
            }
        }
    } catch (const std::logic_error&) {
        throw UsageError("invalid --seeds value '" + text + "'");
    }
    if (seeds.empty()) {
        throw UsageError("--seeds needs at least one seed");
    }
    return seeds;
}

std::vector<std::string> parse_formats(const std::string& text) {
    std::vector<std::string> formats;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item != "json" && item != "dot") {
            throw UsageError("unknown format '" + item + "' (expected json or dot)");
        }
        formats.push_back(item);
    }
    return formats;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
    } else {
        write_file(out_path, content);
    }
}

struct Options {
    std::string input;
    std::size_t k = 0;
    std::string strategy = "exshallow";
    double lambda = 0.03;
    std::string seeds = "1";
    std::string out;
    std::string format = "json";
    bool timing = false;
    double c_star = std::numeric_limits<double>::infinity();
    double w_star = std::numeric_limits<double>::infinity();
};

st::RunConfig make_run_config(const Options& o) {
    st::RunConfig cfg;
    cfg.k = o.k;
    cfg.strategy = st::Strategy::parse(o.strategy, o.lambda);
    cfg.seeds = parse_seeds(o.seeds);
    cfg.threads = st::threads_from_env();
    return cfg;
}

int run_cluster(const Options& o) {
    const auto formats = parse_formats(o.format);
    auto cfg = make_run_config(o);
    cfg.seeds.resize(1);
    const auto X = st::load_csv(o.input);
    const auto result = st::run_experiment(X, cfg);
    const auto table = st::format_table(result, cfg.strategy, o.timing);
    if (o.out.empty()) {
        std::cout << table;
        return 0;
    }
    const std::filesystem::path dir(o.out);
    write_file(dir / "metrics.csv", table);
    for (const auto& f : formats) {
        write_file(dir / ("tree." + f), st::export_tree(result.runs.front().tree, f));
    }
    return 0;
}

int run_bench(const Options& o) {
    const auto cfg = make_run_config(o);
    const auto X = st::load_csv(o.input);
    const auto result = st::run_experiment(X, cfg);
    emit(o.out, st::format_table(result, cfg.strategy, o.timing));
    return 0;
}

int run_calibrate(const Options& o) {
    auto cfg = make_run_config(o);
    const auto X = st::load_csv(o.input);
    st::CalibrationGoal goal;
    goal.c_star = o.c_star;
    goal.w_star = o.w_star;
    goal.lambda_init = o.lambda;
    goal.lambda_hi = std::max(goal.lambda_hi, o.lambda);
    emit(o.out, st::format_calibration_table(st::run_calibration(X, cfg, goal)));
    return 0;
}

int run_export(const Options& o) {
    const auto formats = parse_formats(o.format);
    if (formats.size() != 1) {
        throw UsageError("export takes exactly one --format");
    }
    std::ifstream in(o.input, std::ios::binary);
    if (!in) {
        throw st::ParseError("cannot open " + o.input, 0);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    emit(o.out, st::export_tree(st::tree_from_json(buf.str()), formats.front()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shallow explainable k-means trees"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--input", o.input, "Numeric CSV file")->required();
        sub->add_option("--k", o.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
        sub->add_option("--strategy", o.strategy, "exshallow, exgreedy, imm or exkmc")
            ->check(CLI::IsMember({"exshallow", "exgreedy", "imm", "exkmc"}));
        sub->add_option("--lambda", o.lambda, "ExShallow trade-off parameter")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--seeds", o.seeds, "Seed count (e.g. 30) or comma list (e.g. 1,5,7)");
        sub->add_flag("--timing", o.timing, "Add wall-time columns to tables");
    };

    auto* cluster = app.add_subcommand("cluster", "Build one tree for the first seed");
    add_common(cluster);
    cluster->add_option("--out", o.out, "Directory for metrics.csv and tree exports");
    cluster->add_option("--format", o.format, "Tree export formats: json, dot or json,dot");

    auto* bench = app.add_subcommand("bench", "Seed sweep; one table row per seed");
    add_common(bench);
    bench->add_option("--out", o.out, "CSV output file (stdout when omitted)");

    auto* calibrate = app.add_subcommand("calibrate", "Search lambda against cost / WAES goals");
    add_common(calibrate);
    calibrate->add_option("--out", o.out, "CSV output file (stdout when omitted)");
    calibrate->add_option("--c-star", o.c_star,
                          "Maximum normalized cost (default: ExKMC-style baseline mean)");
    calibrate->add_option("--w-star", o.w_star, "Target WAES (default: ExKMC-style baseline mean)");

    auto* exporter = app.add_subcommand("export", "Re-serialize a saved JSON tree");
    exporter->add_option("--input", o.input, "Tree JSON file")->required();
    exporter->add_option("--format", o.format, "json or dot");
    exporter->add_option("--out", o.out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*cluster) {
            return run_cluster(o);
        }
        if (*bench) {
            return run_bench(o);
        }
        if (*calibrate) {
            return run_calibrate(o);
        }
        return run_export(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const st::DegenerateNodeError& e) {
        std::cerr << "degenerate instance: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const st::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
