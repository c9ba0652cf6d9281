#pragma once

#include <optional>

#include "fieldscan/grid.hh"

namespace fieldscan {

// Exact tiling of an n x m grid into b_n x b_m blocks of size l_n x l_m,
// with l_n * b_n = n and l_m * b_m = m. No partial edge blocks are allowed;
// dimensions without a suitable divisor pair are rejected outright.
struct BlockPartition {
    int l_n = 0;  // block side length, vertical
    int b_n = 0;  // number of blocks, vertical
    int l_m = 0;  // block side length, horizontal
    int b_m = 0;  // number of blocks, horizontal
    double s_n = 0.0;  // achieved exponent log(l_n)/log(n), informational
    double s_m = 0.0;

    int blocks() const { return b_n * b_m; }
    int block_cells() const { return l_n * l_m; }
};

// Chooses the divisor pair (l, b) of n with l >= 2, b >= 2 whose exponent
// log(l)/log(n) is closest to s_target; ties go to the larger l. Throws
// NoValidPartition when n < 4 or n is prime.
BlockPartition make_partition(int n, int m, double s_target = 0.6);

// b_n x b_m matrix of arithmetic block means.
Eigen::MatrixXd block_means(const Grid& grid, const BlockPartition& p);

// Sample variance with divisor N - 1. Throws DegenerateGrid when N < 2.
double sample_variance(const Grid& grid);

enum class SurfaceKind { Constant, A1, A2, A3, A4, Custom };

struct MeanSurface {
    SurfaceKind kind = SurfaceKind::Constant;
    double amplitude = 0.0;
    std::optional<Grid> custom;
};

// Evaluates the mean surface on the index grid i = 1..n, j = 1..m:
//   A1: amplitude on the first block {1..l_n} x {1..l_m};
//   A2: amplitude where j <= m/2;
//   A3: amplitude * (j-1)/(m-1), a linear horizontal trend;
//   A4: amplitude on the L-shape
//       ({n/4 < i <= n/2} x {1 <= j <= m/2}) united with
//       ({1 <= i <= n/4} x {m/4 < j <= m/2}), bounds rounded down.
Grid eval_mean_surface(const MeanSurface& spec, int n, int m,
                       const BlockPartition& p);

const char* surface_name(SurfaceKind k);
SurfaceKind surface_from_name(const std::string& name);

}  // namespace fieldscan
