#include "fieldscan/partition.hh"

#include <cmath>
#include <string>

namespace fieldscan {

namespace {

struct Side {
    int l, b;
    double s;
};

Side choose_side(int n, double s_target) {
    if (n < 4)
        throw NoValidPartition("no block partition for n = " +
                               std::to_string(n) + " (need n >= 4)");
    const double logn = std::log(static_cast<double>(n));
    Side best{0, 0, 0.0};
    double best_diff = 0.0;
    for (int l = 2; l <= n / 2; ++l) {
        if (n % l != 0)
            continue;
        const double s = std::log(static_cast<double>(l)) / logn;
        const double diff = std::abs(s - s_target);
        // Ties go to the larger l; iterating l upward makes ">= is better
        // only when strictly closer" plus an epsilon tie test sufficient.
        if (best.l == 0 || diff < best_diff - 1e-12 ||
            (std::abs(diff - best_diff) <= 1e-12 && l > best.l)) {
            best = Side{l, n / l, s};
            best_diff = diff;
        }
    }
    if (best.l == 0)
        throw NoValidPartition("no block partition for n = " +
                               std::to_string(n) +
                               " (prime dimensions cannot be tiled)");
    return best;
}

}  // namespace

BlockPartition make_partition(int n, int m, double s_target) {
    const Side sn = choose_side(n, s_target);
    const Side sm = choose_side(m, s_target);
    BlockPartition p;
    p.l_n = sn.l;
    p.b_n = sn.b;
    p.s_n = sn.s;
    p.l_m = sm.l;
    p.b_m = sm.b;
    p.s_m = sm.s;
    return p;
}

Eigen::MatrixXd block_means(const Grid& grid, const BlockPartition& p) {
    const auto n = grid.rows(), m = grid.cols();
    if (static_cast<Eigen::Index>(p.l_n) * p.b_n != n ||
        static_cast<Eigen::Index>(p.l_m) * p.b_m != m)
        throw DimensionMismatch("block partition does not tile the grid");
    Eigen::MatrixXd mu(p.b_n, p.b_m);
    const double inv = 1.0 / p.block_cells();
    for (int h = 0; h < p.b_n; ++h)
        for (int k = 0; k < p.b_m; ++k)
            mu(h, k) =
                grid.block(h * p.l_n, k * p.l_m, p.l_n, p.l_m).sum() * inv;
    return mu;
}

double sample_variance(const Grid& grid) {
    const auto N = grid.size();
    if (N < 2)
        throw DegenerateGrid("sample variance needs at least 2 cells");
    const double mean = grid.mean();
    return (grid.array() - mean).square().sum() / static_cast<double>(N - 1);
}

Grid eval_mean_surface(const MeanSurface& spec, int n, int m,
                       const BlockPartition& p) {
    const double a = spec.amplitude;
    Grid mu = Grid::Zero(n, m);
    switch (spec.kind) {
        case SurfaceKind::Constant:
            mu.setConstant(a);
            break;
        case SurfaceKind::A1:
            mu.block(0, 0, p.l_n, p.l_m).setConstant(a);
            break;
        case SurfaceKind::A2:
            // j <= m/2 in 1-based indices.
            mu.leftCols(m / 2).setConstant(a);
            break;
        case SurfaceKind::A3:
            for (int j = 0; j < m; ++j)
                mu.col(j).setConstant(m > 1 ? a * j / (m - 1) : 0.0);
            break;
        case SurfaceKind::A4: {
            const int n4 = n / 4, n2 = n / 2, m4 = m / 4, m2 = m / 2;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    const int i1 = i + 1, j1 = j + 1;
                    const bool lower =
                        i1 > n4 && i1 <= n2 && j1 >= 1 && j1 <= m2;
                    const bool upper = i1 <= n4 && j1 > m4 && j1 <= m2;
                    if (lower || upper)
                        mu(i, j) = a;
                }
            break;
        }
        case SurfaceKind::Custom:
            if (!spec.custom || spec.custom->rows() != n ||
                spec.custom->cols() != m)
                throw DimensionMismatch(
                    "custom mean surface does not match grid dimensions");
            mu = a * (*spec.custom);
            break;
        default:
            throw UnknownKind("unrecognized mean surface kind");
    }
    return mu;
}

const char* surface_name(SurfaceKind k) {
    switch (k) {
        case SurfaceKind::Constant: return "constant";
        case SurfaceKind::A1: return "a1";
        case SurfaceKind::A2: return "a2";
        case SurfaceKind::A3: return "a3";
        case SurfaceKind::A4: return "a4";
        case SurfaceKind::Custom: return "custom";
    }
    throw UnknownKind("unrecognized mean surface kind");
}

SurfaceKind surface_from_name(const std::string& name) {
    if (name == "constant" || name == "none") return SurfaceKind::Constant;
    if (name == "a1") return SurfaceKind::A1;
    if (name == "a2") return SurfaceKind::A2;
    if (name == "a3") return SurfaceKind::A3;
    if (name == "a4") return SurfaceKind::A4;
    if (name == "custom") return SurfaceKind::Custom;
    throw UnknownKind("unrecognized mean surface name: " + name);
}

}  // namespace fieldscan
