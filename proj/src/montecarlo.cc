#include "fieldscan/montecarlo.hh"

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "fieldscan/errors.hh"

namespace fieldscan {

const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::Size: return "size";
        case RunMode::Power: return "power";
        case RunMode::SizeCorrectedPower: return "size_corrected_power";
    }
    return "?";
}

RunMode mode_from_name(const std::string& name) {
    if (name == "size") return RunMode::Size;
    if (name == "power") return RunMode::Power;
    if (name == "size_corrected_power" || name == "corrected")
        return RunMode::SizeCorrectedPower;
    throw UnknownKind("unknown run mode: " + name);
}

namespace {

// One grid actually simulated per replication: the shared null field, or the
// null field plus amplitude * unit surface. All amplitude-0 entries of every
// sweep collapse onto a single null slot, so the matched null sample is
// computed once and reused.
struct UniqueCell {
    int sweep = -1;  // -1 for the shared null cell
    double amplitude = 0.0;
};

struct CellRef {
    int unique = 0;  // index into the UniqueCell list
};

void validate(const ExperimentConfig& c, RunMode mode) {
    if (c.n_values.empty()) throw ConfigError("n_values must be nonempty");
    if (c.tests.empty()) throw ConfigError("tests must be nonempty");
    if (c.noise.empty()) throw ConfigError("noise list must be nonempty");
    if (c.dep.empty()) throw ConfigError("dependence list must be nonempty");
    if (c.surfaces.empty()) throw ConfigError("surface list must be nonempty");
    if (!(c.alpha > 0.0 && c.alpha <= 1.0))
        throw ConfigError("alpha must lie in (0, 1]");
    if (c.reps < 100) {
        if (mode == RunMode::SizeCorrectedPower)
            throw InsufficientNullSample("size correction needs >= 100 reps");
        throw ConfigError("reps must be >= 100");
    }
    for (const auto& sw : c.surfaces)
        if (sw.amplitudes.empty())
            throw ConfigError("every surface sweep needs an amplitude grid");
    bool has_null = false;
    for (const auto& sw : c.surfaces)
        for (double a : sw.amplitudes)
            if (a == 0.0) has_null = true;
    if (mode == RunMode::Size && !has_null)
        throw ConfigError("size simulation needs an amplitude-0 cell");
    if (mode == RunMode::SizeCorrectedPower)
        for (const auto& sw : c.surfaces) {
            bool ok = false;
            for (double a : sw.amplitudes) ok = ok || a == 0.0;
            if (!ok)
                throw InsufficientNullSample(
                    "size correction needs amplitude 0 in every sweep (" +
                    std::string(surface_name(sw.kind)) + " lacks it)");
        }
}

double empirical_crit(std::vector<double> stats, double alpha) {
    std::sort(stats.begin(), stats.end());
    auto r = static_cast<long>(stats.size());
    long k = static_cast<long>(std::floor(alpha * static_cast<double>(r) + 1e-9));
    if (k >= r) return -std::numeric_limits<double>::infinity();
    return stats[static_cast<std::size_t>(r - k - 1)];
}

ExperimentReport run_experiment(const ExperimentConfig& config, RunMode mode) {
    validate(config, mode);
    auto t0 = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.mode = mode;
    report.alpha = config.alpha;
    report.master_seed = config.master_seed;

    const int reps = config.reps;
    const int n_tests = static_cast<int>(config.tests.size());
    unsigned hw = std::thread::hardware_concurrency();
    int n_threads = config.threads > 0 ? config.threads
                                       : static_cast<int>(hw ? hw : 1u);
    n_threads = std::min(n_threads, reps);

    for (int n : config.n_values) {
        const BlockPartition part = make_partition(n, n, config.s_target);

        std::vector<Grid> unit(config.surfaces.size());
        for (std::size_t s = 0; s < config.surfaces.size(); ++s)
            unit[s] = eval_mean_surface(
                MeanSurface{config.surfaces[s].kind, 1.0, {}}, n, n, part);

        // Cell layout shared by every (noise, dep) combination at this n.
        std::vector<UniqueCell> cells;
        std::vector<std::vector<CellRef>> refs(config.surfaces.size());
        int null_cell = -1;
        for (std::size_t s = 0; s < config.surfaces.size(); ++s)
            for (double a : config.surfaces[s].amplitudes) {
                if (a == 0.0) {
                    if (null_cell < 0) {
                        null_cell = static_cast<int>(cells.size());
                        cells.push_back(UniqueCell{-1, 0.0});
                    }
                    refs[s].push_back(CellRef{null_cell});
                } else {
                    refs[s].push_back(CellRef{static_cast<int>(cells.size())});
                    cells.push_back(UniqueCell{static_cast<int>(s), a});
                }
            }
        if (mode == RunMode::SizeCorrectedPower && null_cell < 0)
            throw InsufficientNullSample("no amplitude-0 cell configured");
        const int n_cells = static_cast<int>(cells.size());

        for (NoiseDist dist : config.noise)
            for (const DependenceSpec& dep : config.dep) {
                std::vector<double> stats(
                    static_cast<std::size_t>(reps) * n_cells * n_tests);
                std::mutex err_mu;
                std::exception_ptr err;

                auto worker = [&](int lo, int hi) {
                    try {
                        const std::uint64_t rho_bits =
                            std::bit_cast<std::uint64_t>(dep.rho);
                        for (int rep = lo; rep < hi; ++rep) {
                            std::uint64_t seed = derive_seed(
                                {config.master_seed,
                                 static_cast<std::uint64_t>(n),
                                 static_cast<std::uint64_t>(dist),
                                 static_cast<std::uint64_t>(dep.kind),
                                 static_cast<std::uint64_t>(dep.q), rho_bits,
                                 static_cast<std::uint64_t>(rep)});
                            Grid base =
                                gen_dependent(n, n, dep, NoiseSpec{dist, seed});
                            for (int c = 0; c < n_cells; ++c) {
                                Grid x = base;
                                if (cells[c].sweep >= 0)
                                    x += cells[c].amplitude *
                                         unit[static_cast<std::size_t>(
                                             cells[c].sweep)];
                                Grid work;
                                if (config.decorrelate)
                                    work = whiten(x, DecorrelateOptions{}).grid;
                                else
                                    work = std::move(x);
                                double s2 = sample_variance(work);
                                for (int t = 0; t < n_tests; ++t) {
                                    TestResult r =
                                        config.tests[static_cast<std::size_t>(
                                            t)] == TestKind::GMD
                                            ? gmd_statistic(work, part, s2)
                                            : var_statistic(work, part, s2);
                                    stats[(static_cast<std::size_t>(rep) *
                                               n_cells +
                                           c) *
                                              n_tests +
                                          t] = r.statistic;
                                }
                            }
                        }
                    } catch (...) {
                        std::lock_guard<std::mutex> lk(err_mu);
                        if (!err) err = std::current_exception();
                    }
                };

                if (n_threads <= 1) {
                    worker(0, reps);
                } else {
                    std::vector<std::thread> pool;
                    int chunk = (reps + n_threads - 1) / n_threads;
                    for (int th = 0; th < n_threads; ++th) {
                        int lo = th * chunk;
                        int hi = std::min(reps, lo + chunk);
                        if (lo >= hi) break;
                        pool.emplace_back(worker, lo, hi);
                    }
                    for (auto& th : pool) th.join();
                }
                if (err) std::rethrow_exception(err);

                auto cell_stats = [&](int c, int t) {
                    std::vector<double> out(static_cast<std::size_t>(reps));
                    for (int rep = 0; rep < reps; ++rep)
                        out[static_cast<std::size_t>(rep)] =
                            stats[(static_cast<std::size_t>(rep) * n_cells +
                                   c) *
                                      n_tests +
                                  t];
                    return out;
                };

                std::vector<double> crit(static_cast<std::size_t>(n_tests));
                if (mode == RunMode::SizeCorrectedPower)
                    for (int t = 0; t < n_tests; ++t)
                        crit[static_cast<std::size_t>(t)] = empirical_crit(
                            cell_stats(null_cell, t), config.alpha);

                auto push_row = [&](int c, int t, const char* sname,
                                    double amplitude) {
                    std::vector<double> s = cell_stats(c, t);
                    int rejected = 0;
                    if (mode == RunMode::SizeCorrectedPower) {
                        for (double v : s)
                            if (v > crit[static_cast<std::size_t>(t)])
                                ++rejected;
                    } else {
                        for (double v : s)
                            if (p_value(v) <= config.alpha) ++rejected;
                    }
                    double rate =
                        static_cast<double>(rejected) / static_cast<double>(reps);
                    ReportRow row;
                    row.test = test_name(
                        config.tests[static_cast<std::size_t>(t)]);
                    row.n = n;
                    row.dist = noise_name(dist);
                    row.dep_kind = dep_name(dep.kind);
                    row.rho = dep.kind == DepKind::IID ? 0.0 : dep.rho;
                    row.surface = sname;
                    row.amplitude = amplitude;
                    row.decorrelated = config.decorrelate;
                    row.reps = reps;
                    row.rate = rate;
                    row.se = std::sqrt(rate * (1.0 - rate) /
                                       static_cast<double>(reps));
                    if (mode == RunMode::SizeCorrectedPower) {
                        row.crit_value = crit[static_cast<std::size_t>(t)];
                        row.has_crit = true;
                    }
                    report.rows.push_back(std::move(row));
                };

                if (mode == RunMode::Size) {
                    for (int t = 0; t < n_tests; ++t)
                        push_row(null_cell, t, surface_name(SurfaceKind::Constant),
                                 0.0);
                } else {
                    for (std::size_t s = 0; s < config.surfaces.size(); ++s)
                        for (std::size_t a = 0;
                             a < config.surfaces[s].amplitudes.size(); ++a)
                            for (int t = 0; t < n_tests; ++t)
                                push_row(refs[s][a].unique, t,
                                         surface_name(config.surfaces[s].kind),
                                         config.surfaces[s].amplitudes[a]);
                }
            }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return report;
}

}  // namespace

ExperimentReport simulate_size(const ExperimentConfig& config) {
    return run_experiment(config, RunMode::Size);
}

ExperimentReport simulate_power(const ExperimentConfig& config) {
    return run_experiment(config, RunMode::Power);
}

ExperimentReport size_corrected_power(const ExperimentConfig& config) {
    return run_experiment(config, RunMode::SizeCorrectedPower);
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string emit_report_csv(const ExperimentReport& report) {
    if (report.rows.empty()) throw IOError("cannot emit an empty report");
    std::ostringstream os;
    os << "# mode: " << mode_name(report.mode) << "\n";
    os << "# alpha: " << fmt17(report.alpha) << "\n";
    os << "# master_seed: " << report.master_seed << "\n";
    os << "# wall_seconds: " << fmt17(report.wall_seconds) << "\n";
    os << "# seed pairing: null and alternative cells share per-replication "
          "noise (seeds independent of surface and amplitude)\n";
    os << kReportHeader << "\n";
    for (const ReportRow& r : report.rows) {
        os << r.test << ',' << r.n << ',' << r.dist << ',' << r.dep_kind << ','
           << fmt17(r.rho) << ',' << r.surface << ',' << fmt17(r.amplitude)
           << ',' << (r.decorrelated ? 1 : 0) << ',' << r.reps << ','
           << fmt17(r.rate) << ',' << fmt17(r.se) << ','
           << (r.has_crit ? fmt17(r.crit_value) : std::string()) << "\n";
    }
    return os.str();
}

std::string emit_report_table(const ExperimentReport& report) {
    if (report.rows.empty()) throw IOError("cannot emit an empty report");
    std::vector<std::array<std::string, 12>> lines;
    lines.push_back({"test", "n", "dist", "dep_kind", "rho", "surface",
                     "amplitude", "decor", "reps", "rate", "se", "crit"});
    char buf[64];
    auto f4 = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    for (const ReportRow& r : report.rows)
        lines.push_back({r.test, std::to_string(r.n), r.dist, r.dep_kind,
                         f4(r.rho), r.surface, f4(r.amplitude),
                         r.decorrelated ? "yes" : "no", std::to_string(r.reps),
                         f4(r.rate), f4(r.se),
                         r.has_crit ? f4(r.crit_value) : "-"});
    std::array<std::size_t, 12> width{};
    for (const auto& ln : lines)
        for (std::size_t c = 0; c < 12; ++c)
            width[c] = std::max(width[c], ln[c].size());
    std::ostringstream os;
    for (const auto& ln : lines) {
        for (std::size_t c = 0; c < 12; ++c) {
            os << ln[c];
            if (c + 1 < 12)
                os << std::string(width[c] - ln[c].size() + 2, ' ');
        }
        os << "\n";
    }
    return os.str();
}

ExperimentReport parse_report_csv(const std::string& text) {
    ExperimentReport report;
    std::istringstream is(text);
    std::string line;
    bool saw_header = false;
    int lineno = 0;
    auto to_d = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ParseError("report line " + std::to_string(lineno) +
                             ": bad number '" + s + "'");
        }
    };
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# mode: ", 0) == 0)
                report.mode = mode_from_name(line.substr(8));
            else if (line.rfind("# alpha: ", 0) == 0)
                report.alpha = to_d(line.substr(9));
            else if (line.rfind("# master_seed: ", 0) == 0)
                report.master_seed = std::stoull(line.substr(15));
            else if (line.rfind("# wall_seconds: ", 0) == 0)
                report.wall_seconds = to_d(line.substr(16));
            continue;
        }
        if (!saw_header) {
            if (line != kReportHeader)
                throw ParseError("report header mismatch: '" + line + "'");
            saw_header = true;
            continue;
        }
        std::vector<std::string> f = split_csv(line);
        if (f.size() != 12)
            throw ParseError("report line " + std::to_string(lineno) +
                             ": expected 12 fields, got " +
                             std::to_string(f.size()));
        ReportRow r;
        r.test = f[0];
        r.n = static_cast<int>(to_d(f[1]));
        r.dist = f[2];
        r.dep_kind = f[3];
        r.rho = to_d(f[4]);
        r.surface = f[5];
        r.amplitude = to_d(f[6]);
        r.decorrelated = to_d(f[7]) != 0.0;
        r.reps = static_cast<int>(to_d(f[8]));
        r.rate = to_d(f[9]);
        r.se = to_d(f[10]);
        if (!f[11].empty()) {
            r.crit_value = to_d(f[11]);
            r.has_crit = true;
        }
        report.rows.push_back(std::move(r));
    }
    if (!saw_header) throw ParseError("report has no header line");
    return report;
}

}  // namespace fieldscan
