#include "fieldscan/stats.hh"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fieldscan {

const char* test_name(TestKind k) {
    switch (k) {
        case TestKind::GMD: return "gmd";
        case TestKind::Var: return "var";
    }
    throw UnknownKind("unrecognized test kind");
}

TestKind test_from_name(const std::string& name) {
    if (name == "gmd") return TestKind::GMD;
    if (name == "var") return TestKind::Var;
    throw UnknownKind("unrecognized test name: " + name);
}

double gmd_limit_variance() {
    return 4.0 / 3.0 + (8.0 / M_PI) * (std::sqrt(3.0) - 2.0);
}

double gmd_U(const Eigen::MatrixXd& means) {
    const auto B = means.size();
    if (B < 2)
        throw TooFewBlocks("GMD needs at least 2 blocks");
    std::vector<double> sorted(means.data(), means.data() + B);
    std::sort(sorted.begin(), sorted.end());
    double acc = 0.0;
    for (Eigen::Index i = 1; i <= B; ++i)
        acc += (2.0 * i - B - 1) * sorted[i - 1];
    return 2.0 * acc / (static_cast<double>(B) * (B - 1));
}

double p_value(double statistic) {
    return 0.5 * std::erfc(statistic / std::sqrt(2.0));
}

TestResult gmd_statistic(const Grid& grid, const BlockPartition& p,
                         double sigma2_hat) {
    if (sigma2_hat <= 0.0)
        throw ZeroVariance("GMD statistic requires a positive variance");
    const double U = gmd_U(block_means(grid, p));
    const double B = p.blocks();
    const double G =
        std::sqrt(B) * (std::sqrt(double(p.block_cells()) / sigma2_hat) * U -
                        2.0 / std::sqrt(M_PI));
    TestResult r;
    r.kind = TestKind::GMD;
    r.raw = U;
    r.statistic = G / std::sqrt(gmd_limit_variance());
    r.p_value = p_value(r.statistic);
    r.partition = p;
    r.sigma2_hat = sigma2_hat;
    return r;
}

TestResult var_statistic(const Grid& grid, const BlockPartition& p,
                         double sigma2_hat) {
    if (sigma2_hat <= 0.0)
        throw ZeroVariance("Var statistic requires a positive variance");
    const Eigen::MatrixXd mu = block_means(grid, p);
    const double B = p.blocks();
    const double xbar = grid.mean();
    // Two-pass centered sum: equals sum(mu^2) - B*xbar^2 because the blocks
    // tile the grid exactly, but stays accurate when |xbar| dwarfs the
    // dispersion of the block means.
    const double centered = (mu.array() - xbar).square().sum();
    const double bracket = (p.block_cells() / sigma2_hat) * centered - B + 1.0;
    TestResult r;
    r.kind = TestKind::Var;
    r.raw = centered;
    r.statistic = bracket / std::sqrt(2.0 * B);
    r.p_value = p_value(r.statistic);
    r.partition = p;
    r.sigma2_hat = sigma2_hat;
    return r;
}

double consistency_T(const Grid& grid, const BlockPartition& p) {
    const Eigen::MatrixXd mu = block_means(grid, p);
    const double xbar = grid.mean();
    return (mu.array() - xbar).square().sum() / p.blocks();
}

HolmResult holm_adjust(const std::vector<double>& p_values, double alpha) {
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0))
            throw InvalidP("p-values must lie in [0, 1]");
    const std::size_t M = p_values.size();
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p_values[a] < p_values[b];
    });
    HolmResult res;
    res.reject.assign(M, false);
    res.adjusted.assign(M, 1.0);
    double running = 0.0;
    bool alive = true;
    for (std::size_t k = 0; k < M; ++k) {
        const std::size_t idx = order[k];
        const double scaled = (M - k) * p_values[idx];
        running = std::min(1.0, std::max(running, scaled));
        res.adjusted[idx] = running;
        if (alive && p_values[idx] <= alpha / (M - k))
            res.reject[idx] = true;
        else
            alive = false;
    }
    return res;
}

TestResult run_test(const Grid& grid, TestKind kind, double s_target,
                    const std::optional<DecorrelateOptions>& decor) {
    require_finite(grid);
    Grid working = grid;
    bool decorrelated = false;
    bool repaired = false;
    if (decor && decor->path != DecorrelatePath::None) {
        WhitenResult w = whiten(grid, *decor);
        working = std::move(w.grid);
        decorrelated = true;
        repaired = w.repaired;
    }
    const BlockPartition p =
        make_partition(static_cast<int>(grid.rows()),
                       static_cast<int>(grid.cols()), s_target);
    const double s2 = sample_variance(working);
    TestResult r = kind == TestKind::GMD ? gmd_statistic(working, p, s2)
                                         : var_statistic(working, p, s2);
    r.decorrelated = decorrelated;
    r.repaired = repaired;
    return r;
}

}  // namespace fieldscan
