#pragma once

#include <string>
#include <vector>

#include "fieldscan/grid.hh"
#include "fieldscan/montecarlo.hh"

namespace fieldscan {

struct GridFile {
    std::string path;
    char delimiter = ',';
    bool header = false;
};

// Plain numeric CSV, one grid row per line. Every field must parse as a
// finite real and every row must have the same width. Written grids carry 17
// significant digits, so write -> read is a bit-exact roundtrip.
Grid parse_grid(const std::string& text, char delimiter = ',',
                bool header = false);
Grid read_grid(const GridFile& file);
std::string format_grid(const Grid& grid, char delimiter = ',');
void write_grid(const Grid& grid, const GridFile& file);

struct NdviResult {
    Grid grid;
    long flagged = 0;  // cells with nir + red = 0, mapped to 0
};

// Normalized difference (nir - red) / (nir + red), elementwise.
NdviResult ndvi(const Grid& red, const Grid& nir);

// Sub-grids in row-major tile order; rows must divide n, cols must divide m.
std::vector<Grid> split_grid(const Grid& grid, int rows, int cols);
Grid merge_tiles(const std::vector<Grid>& tiles, int rows, int cols);

struct ParsedExperiment {
    ExperimentConfig config;
    RunMode mode = RunMode::Size;
    bool explicit_seed = false;  // whether the config set master_seed itself
};

// Flat key = value configuration mirroring the ExperimentConfig fields, with
// comma-separated lists, '#' comments, and compound entries like sma(1,0.2)
// or a2(0,0.5,1). An optional `mode` key selects the harness operation.
ParsedExperiment parse_experiment_config(const std::string& text);
ParsedExperiment read_experiment_config(const std::string& path);

DependenceSpec parse_dependence_spec(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fieldscan
