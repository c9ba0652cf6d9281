#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldscan/decorrelate.hh"
#include "fieldscan/fieldgen.hh"
#include "fieldscan/stats.hh"

namespace fieldscan {

struct SurfaceSweep {
    SurfaceKind kind = SurfaceKind::Constant;
    std::vector<double> amplitudes{0.0};
};

struct ExperimentConfig {
    std::vector<int> n_values;  // square grids, n = m
    double s_target = 0.6;
    double alpha = 0.05;
    int reps = 1000;
    std::vector<TestKind> tests{TestKind::GMD, TestKind::Var};
    std::vector<NoiseDist> noise{NoiseDist::StdNormal};
    std::vector<DependenceSpec> dep{DependenceSpec{}};
    std::vector<SurfaceSweep> surfaces{SurfaceSweep{}};
    bool decorrelate = false;
    std::uint64_t master_seed = 0;
    int threads = 0;  // 0 means hardware concurrency; never affects results
};

enum class RunMode { Size, Power, SizeCorrectedPower };

const char* mode_name(RunMode m);
RunMode mode_from_name(const std::string& name);

struct ReportRow {
    std::string test;
    int n = 0;
    std::string dist;
    std::string dep_kind;
    double rho = 0.0;
    std::string surface;
    double amplitude = 0.0;
    bool decorrelated = false;
    int reps = 0;
    double rate = 0.0;
    double se = 0.0;
    double crit_value = 0.0;
    bool has_crit = false;
};

struct ExperimentReport {
    RunMode mode = RunMode::Size;
    double alpha = 0.05;
    std::uint64_t master_seed = 0;
    double wall_seconds = 0.0;
    std::vector<ReportRow> rows;
};

// Empirical sizes: rejection rates at the asymptotic critical value over the
// null cells (amplitude 0) of the configured grid.
ExperimentReport simulate_size(const ExperimentConfig& config);

// Rejection rates at the asymptotic critical value for every configured
// amplitude. Null and alternative replications share noise by construction:
// per-replication seeds never depend on surface or amplitude.
ExperimentReport simulate_power(const ExperimentConfig& config);

// Rates against the empirical (1 - alpha) null quantile of the matched null
// sample; every amplitude grid must contain 0.
ExperimentReport size_corrected_power(const ExperimentConfig& config);

inline constexpr const char* kReportHeader =
    "test,n,dist,dep_kind,rho,surface,amplitude,decorrelated,reps,rate,se,"
    "crit_value";

// Long-format CSV: metadata as leading '#' comment lines, then the mandatory
// header, then one row per cell. Numeric fields print with 17 significant
// digits so parsing the emission recovers the rates exactly.
std::string emit_report_csv(const ExperimentReport& report);

// Human-oriented aligned table of the same rows.
std::string emit_report_table(const ExperimentReport& report);

ExperimentReport parse_report_csv(const std::string& text);

}  // namespace fieldscan
