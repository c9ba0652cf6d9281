// fieldscan: block-based mean-change detection on 2-D grids.
//
// Subcommands: test, scan, ndvi, simulate, generate. Machine output goes to
// stdout or -o, diagnostics to stderr. Exit codes: 0 success, 1 statistical
// error, 2 I/O or argument error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fieldscan/decorrelate.hh"
#include "fieldscan/errors.hh"
#include "fieldscan/fieldgen.hh"
#include "fieldscan/io.hh"
#include "fieldscan/montecarlo.hh"
#include "fieldscan/stats.hh"

namespace fs = fieldscan;
using json = nlohmann::ordered_json;

namespace {

std::optional<fs::DecorrelateOptions> decor_from_flag(const std::string& s) {
    if (s.empty() || s == "none") return std::nullopt;
    fs::DecorrelateOptions opts;
    if (s == "full")
        opts.path = fs::DecorrelatePath::Full;
    else if (s == "separable")
        opts.path = fs::DecorrelatePath::Separable;
    else
        throw fs::UnknownKind("unknown de-correlation path '" + s +
                              "' (expected none, full or separable)");
    return opts;
}

json result_json(const fs::TestResult& r, int n, int m) {
    json j;
    j["test"] = fs::test_name(r.kind);
    j["n"] = n;
    j["m"] = m;
    j["l_n"] = r.partition.l_n;
    j["l_m"] = r.partition.l_m;
    j["b_n"] = r.partition.b_n;
    j["b_m"] = r.partition.b_m;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["sigma2_hat"] = r.sigma2_hat;
    j["decorrelated"] = r.decorrelated;
    return j;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        fs::write_text_file(out_path, text);
}

int cmd_test(const std::string& grid_path, const std::string& test_flag,
             double s_target, const std::string& decor_flag,
             const std::string& out_path) {
    fs::Grid g = fs::read_grid({grid_path});
    fs::TestKind kind = fs::test_from_name(test_flag);
    auto decor = decor_from_flag(decor_flag);
    fs::TestResult r = fs::run_test(g, kind, s_target, decor);
    emit(out_path, result_json(r, static_cast<int>(g.rows()),
                               static_cast<int>(g.cols()))
                           .dump() +
                       "\n");
    std::fprintf(stderr,
                 "%s test on %ldx%ld grid: statistic %.6f, p = %.6g\n"
                 "blocks %dx%d of size %dx%d, sigma2_hat %.6g%s%s\n",
                 fs::test_name(kind), static_cast<long>(g.rows()),
                 static_cast<long>(g.cols()), r.statistic, r.p_value,
                 r.partition.b_n, r.partition.b_m, r.partition.l_n,
                 r.partition.l_m, r.sigma2_hat,
                 r.decorrelated ? ", de-correlated" : "",
                 r.repaired ? " (covariance repaired)" : "");
    return 0;
}

int cmd_scan(const std::string& grid_path, int rows, int cols,
             const std::string& test_flag, double s_target,
             const std::string& decor_flag, double alpha,
             const std::string& out_path) {
    fs::Grid g = fs::read_grid({grid_path});
    fs::TestKind kind = fs::test_from_name(test_flag);
    auto decor = decor_from_flag(decor_flag);
    std::vector<fs::Grid> tiles = fs::split_grid(g, rows, cols);

    std::vector<fs::TestResult> results;
    std::vector<double> pvals;
    results.reserve(tiles.size());
    for (const fs::Grid& tile : tiles) {
        results.push_back(fs::run_test(tile, kind, s_target, decor));
        pvals.push_back(results.back().p_value);
    }
    fs::HolmResult holm = fs::holm_adjust(pvals, alpha);

    std::string out;
    for (std::size_t k = 0; k < results.size(); ++k) {
        json j;
        j["tile"] = k;
        j["row"] = static_cast<int>(k) / cols;
        j["col"] = static_cast<int>(k) % cols;
        json base = result_json(results[k],
                                static_cast<int>(tiles[k].rows()),
                                static_cast<int>(tiles[k].cols()));
        j.update(base);
        j["p_adjusted"] = holm.adjusted[k];
        j["reject"] = static_cast<bool>(holm.reject[k]);
        out += j.dump() + "\n";
    }
    emit(out_path, out);

    int n_reject = 0;
    for (bool b : holm.reject) n_reject += b ? 1 : 0;
    std::fprintf(stderr,
                 "scan: %zu tiles (%dx%d), %s test, alpha %g with Holm "
                 "correction, %d flagged\n",
                 tiles.size(), rows, cols, fs::test_name(kind), alpha,
                 n_reject);
    for (int r = 0; r < rows; ++r) {
        std::string line = "  ";
        for (int c = 0; c < cols; ++c)
            line += holm.reject[static_cast<std::size_t>(r) * cols + c]
                        ? '#'
                        : '.';
        std::fprintf(stderr, "%s\n", line.c_str());
    }
    return 0;
}

int cmd_ndvi(const std::string& red_path, const std::string& nir_path,
             const std::string& out_path) {
    fs::Grid red = fs::read_grid({red_path});
    fs::Grid nir = fs::read_grid({nir_path});
    fs::NdviResult r = fs::ndvi(red, nir);
    emit(out_path, fs::format_grid(r.grid));
    std::fprintf(stderr, "ndvi: %ldx%ld grid, %ld zero-denominator cell(s)\n",
                 static_cast<long>(r.grid.rows()),
                 static_cast<long>(r.grid.cols()), r.flagged);
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& mode_flag,
                 std::uint64_t seed, bool seed_given, int threads,
                 const std::string& out_path) {
    fs::ParsedExperiment parsed = fs::read_experiment_config(config_path);
    if (seed_given) {
        parsed.config.master_seed = seed;
        parsed.explicit_seed = true;
    }
    if (!parsed.explicit_seed)
        throw fs::ConfigError(
            "simulate needs a seed: set master_seed in the config or pass "
            "--seed");
    if (!mode_flag.empty()) parsed.mode = fs::mode_from_name(mode_flag);
    if (threads > 0) parsed.config.threads = threads;

    fs::ExperimentReport report;
    switch (parsed.mode) {
        case fs::RunMode::Size:
            report = fs::simulate_size(parsed.config);
            break;
        case fs::RunMode::Power:
            report = fs::simulate_power(parsed.config);
            break;
        case fs::RunMode::SizeCorrectedPower:
            report = fs::size_corrected_power(parsed.config);
            break;
    }
    emit(out_path, fs::emit_report_csv(report));
    std::fprintf(stderr, "simulate (%s): %zu cells in %.1f s\n",
                 fs::mode_name(report.mode), report.rows.size(),
                 report.wall_seconds);
    std::fputs(fs::emit_report_table(report).c_str(), stderr);
    return 0;
}

int cmd_generate(int n, int m, const std::string& surface_flag,
                 double amplitude, const std::string& dep_flag, int q,
                 double rho, const std::string& dist_flag, double s_target,
                 std::uint64_t seed, const std::string& out_path) {
    if (m <= 0) m = n;
    fs::DependenceSpec dep;
    if (dep_flag == "iid") {
        dep = fs::DependenceSpec{};
    } else if (dep_flag == "sma") {
        dep = fs::DependenceSpec{fs::DepKind::SMA, q, rho};
    } else if (dep_flag == "sar") {
        dep = fs::DependenceSpec{fs::DepKind::SARApprox, q, rho};
    } else {
        throw fs::UnknownKind("unknown dependence kind '" + dep_flag + "'");
    }
    fs::NoiseSpec noise{fs::noise_from_name(dist_flag), seed};
    fs::SurfaceKind kind = fs::surface_from_name(surface_flag);

    fs::Grid field;
    if (kind == fs::SurfaceKind::Constant) {
        field = fs::gen_dependent(n, m, dep, noise);
        field.array() += amplitude;
    } else {
        fs::BlockPartition part = fs::make_partition(n, m, s_target);
        field = fs::gen_field(n, m, fs::MeanSurface{kind, amplitude, {}}, dep,
                              noise, part);
    }
    emit(out_path, fs::format_grid(field));
    std::fprintf(stderr, "generate: %dx%d field, surface %s a=%g, %s noise\n",
                 n, m, fs::surface_name(kind), amplitude, dist_flag.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-based mean-change tests for 2-D random fields"};
    app.require_subcommand(1);

    std::string grid_path, test_flag = "var", decor_flag = "none", out_path;
    double s_target = 0.6, alpha = 0.05, amplitude = 0.0, rho = 0.0;
    int rows = 1, cols = 1, n = 0, m = 0, q = 0, threads = 0;
    std::string red_path, nir_path, config_path, mode_flag, surface_flag =
        "constant", dep_flag = "iid", dist_flag = "normal";
    std::uint64_t seed = 0;

    CLI::App* t = app.add_subcommand("test", "Run one test on a grid file");
    t->add_option("grid", grid_path, "grid CSV")->required();
    t->add_option("--test", test_flag, "gmd or var (default var)");
    t->add_option("--s", s_target, "block exponent target (default 0.6)");
    t->add_option("--decorrelate", decor_flag, "none, full or separable");
    t->add_option("-o,--output", out_path, "output path (default stdout)");

    CLI::App* sc = app.add_subcommand(
        "scan", "Split a grid into tiles and test each with Holm correction");
    sc->add_option("grid", grid_path, "grid CSV")->required();
    sc->add_option("--rows", rows, "tile rows")->required();
    sc->add_option("--cols", cols, "tile columns")->required();
    sc->add_option("--test", test_flag, "gmd or var (default var)");
    sc->add_option("--s", s_target, "block exponent target (default 0.6)");
    sc->add_option("--decorrelate", decor_flag,
                   "none, full or separable (default separable)");
    sc->add_option("--alpha", alpha, "family-wise level (default 0.05)");
    sc->add_option("-o,--output", out_path, "output path (default stdout)");

    CLI::App* nd = app.add_subcommand("ndvi", "NDVI from red and nir bands");
    nd->add_option("--red", red_path, "red band CSV")->required();
    nd->add_option("--nir", nir_path, "near-infrared band CSV")->required();
    nd->add_option("-o,--output", out_path, "output path (default stdout)");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo harness");
    sim->add_option("--config", config_path, "experiment config file")
        ->required();
    sim->add_option("--mode", mode_flag,
                    "size, power or size_corrected_power (overrides config)");
    CLI::Option* sim_seed =
        sim->add_option("--seed", seed, "master seed (overrides config)");
    sim->add_option("--threads", threads, "worker threads (overrides config)");
    sim->add_option("-o,--output", out_path, "report CSV path");

    CLI::App* gen = app.add_subcommand("generate", "Draw one synthetic field");
    gen->add_option("--n", n, "grid rows")->required();
    gen->add_option("--m", m, "grid columns (default n)");
    gen->add_option("--surface", surface_flag,
                    "constant, a1, a2, a3 or a4 (default constant)");
    gen->add_option("--amplitude", amplitude, "surface amplitude");
    gen->add_option("--dep", dep_flag, "iid, sma or sar (default iid)");
    gen->add_option("--q", q, "dependence order");
    gen->add_option("--rho", rho, "dependence decay");
    gen->add_option("--dist", dist_flag,
                    "normal, t3 or chisq2 (default normal)");
    gen->add_option("--s", s_target, "block exponent target (default 0.6)");
    gen->add_option("--seed", seed, "generator seed")->required();
    gen->add_option("-o,--output", out_path, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (t->parsed())
            return cmd_test(grid_path, test_flag, s_target, decor_flag,
                            out_path);
        if (sc->parsed()) {
            if (decor_flag == "none" &&
                sc->get_option("--decorrelate")->count() == 0)
                decor_flag = "separable";
            return cmd_scan(grid_path, rows, cols, test_flag, s_target,
                            decor_flag, alpha, out_path);
        }
        if (nd->parsed()) return cmd_ndvi(red_path, nir_path, out_path);
        if (sim->parsed())
            return cmd_simulate(config_path, mode_flag, seed,
                                sim_seed->count() > 0, threads, out_path);
        if (gen->parsed())
            return cmd_generate(n, m, surface_flag, amplitude, dep_flag, q,
                                rho, dist_flag, s_target, seed, out_path);
    } catch (const fs::InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const fs::StatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
