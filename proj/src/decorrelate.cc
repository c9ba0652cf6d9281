#include "fieldscan/decorrelate.hh"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace fieldscan {

int bandwidth(int k) {
    if (k < 1)
        throw InputError("bandwidth requires k >= 1");
    return static_cast<int>(std::floor(0.9 * std::cbrt(double(k))));
}

double empirical_autocov(const Grid& grid, int h1, int h2) {
    const int n = static_cast<int>(grid.rows());
    const int m = static_cast<int>(grid.cols());
    if (std::abs(h1) >= n || std::abs(h2) >= m)
        throw LagOutOfRange("autocovariance lag exceeds grid dimensions");
    if (h1 < 0 || (h1 == 0 && h2 < 0)) {
        h1 = -h1;
        h2 = -h2;
    }
    const double mean = grid.mean();
    // For h2 < 0 the second factor runs ahead in rows and behind in
    // columns; shifting the column window keeps all indices in range.
    const int j_lo = h2 < 0 ? -h2 : 0;
    const int j_hi = h2 < 0 ? m : m - h2;
    double acc = 0.0;
    for (int j = j_lo; j < j_hi; ++j)
        for (int i = 0; i < n - h1; ++i)
            acc += (grid(i, j) - mean) * (grid(i + h1, j + h2) - mean);
    return acc / (static_cast<double>(n) * m);
}

AutocovTable::AutocovTable(int b1, int b2)
    : b1_(b1),
      b2_(b2),
      pos_(Eigen::MatrixXd::Zero(b1 + 1, b2 + 1)),
      neg_(b1 > 0 && b2 > 0 ? Eigen::MatrixXd::Zero(b1, b2)
                            : Eigen::MatrixXd()) {}

double AutocovTable::at(int h1, int h2) const {
    if (h1 < 0 || (h1 == 0 && h2 < 0)) {
        h1 = -h1;
        h2 = -h2;
    }
    if (h1 > b1_ || std::abs(h2) > b2_)
        return 0.0;
    if (h2 >= 0)
        return pos_(h1, h2);
    return neg_(h1 - 1, -h2 - 1);
}

void AutocovTable::set(int h1, int h2, double value) {
    if (h1 < 0 || (h1 == 0 && h2 < 0) || h1 > b1_ || std::abs(h2) > b2_)
        throw LagOutOfRange("autocovariance table lag outside canonical band");
    if (h2 >= 0)
        pos_(h1, h2) = value;
    else
        neg_(h1 - 1, -h2 - 1) = value;
}

AutocovTable estimate_autocov_table(const Grid& grid) {
    const int n = static_cast<int>(grid.rows());
    const int m = static_cast<int>(grid.cols());
    if (n < 2 || m < 2)
        throw DegenerateGrid("autocovariance table needs n, m >= 2");
    AutocovTable table(bandwidth(n), bandwidth(m));
    for (int h1 = 0; h1 <= table.b1(); ++h1)
        for (int h2 = h1 == 0 ? 0 : -table.b2(); h2 <= table.b2(); ++h2)
            table.set(h1, h2, empirical_autocov(grid, h1, h2));
    return table;
}

Eigen::MatrixXd assemble_full(const AutocovTable& table, int n, int m,
                              MixedLagPolicy mixed, int size_guard) {
    const long N = static_cast<long>(n) * m;
    if (N > size_guard)
        throw SizeGuardExceeded(
            "full covariance would be " + std::to_string(N) + "^2; raise "
            "the size guard or use the separable path");
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N);
    for (int h1 = -table.b1(); h1 <= table.b1(); ++h1)
        for (int h2 = -table.b2(); h2 <= table.b2(); ++h2) {
            double g = table.at(h1, h2);
            if (static_cast<long>(h1) * h2 < 0) {
                if (mixed == MixedLagPolicy::Zero)
                    g = 0.0;
                else if (mixed == MixedLagPolicy::Reflect)
                    g = table.at(std::abs(h1), std::abs(h2));
            }
            if (g == 0.0)
                continue;
            for (int j = std::max(0, -h2); j < std::min(m, m - h2); ++j)
                for (int i = std::max(0, -h1); i < std::min(n, n - h1); ++i)
                    S(i + j * n, (i + h1) + (j + h2) * n) = g;
        }
    return S;
}

SeparableModel assemble_separable(const Grid& grid) {
    const int n = static_cast<int>(grid.rows());
    const int m = static_cast<int>(grid.cols());
    const double g00 = empirical_autocov(grid, 0, 0);
    if (g00 <= 0.0)
        throw ZeroVariance("separable model requires positive variance");
    SeparableModel model;
    const int bm = bandwidth(m), bn = bandwidth(n);
    model.sigma1 = Eigen::MatrixXd::Zero(m, m);
    for (int d = 0; d <= std::min(bm, m - 1); ++d) {
        const double g = empirical_autocov(grid, 0, d);
        for (int j = 0; j + d < m; ++j) {
            model.sigma1(j, j + d) = g;
            model.sigma1(j + d, j) = g;
        }
    }
    model.sigma2 = Eigen::MatrixXd::Identity(n, n);
    for (int d = 1; d <= std::min(bn, n - 1); ++d) {
        const double r = empirical_autocov(grid, d, 0) / g00;
        for (int i = 0; i + d < n; ++i) {
            model.sigma2(i, i + d) = r;
            model.sigma2(i + d, i) = r;
        }
    }
    return model;
}

namespace {

bool cholesky_ok(const Eigen::MatrixXd& M) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    return llt.info() == Eigen::Success;
}

// Two-phase modified-Cholesky perturbation. Phase one performs ordinary
// pivoted Cholesky steps while they are safe; once a step would go bad the
// remaining pivots get nondecreasing diagonal boosts sized by Gershgorin
// bounds of the remaining submatrix, with an eigenvalue-based finish for
// the trailing 2 x 2 block. Returns the per-row perturbation in the
// original row order.
Eigen::VectorXd two_phase_delta(const Eigen::MatrixXd& M0) {
    Eigen::MatrixXd A = M0;
    const int n = static_cast<int>(A.rows());
    const double tau = std::cbrt(std::numeric_limits<double>::epsilon());
    const double gamma = A.diagonal().cwiseAbs().maxCoeff();
    const double taugam = tau * gamma;
    const double mu = 0.1;
    Eigen::VectorXi perm = Eigen::VectorXi::LinSpaced(n, 0, n - 1);
    Eigen::VectorXd E = Eigen::VectorXd::Zero(n);
    auto swap_sym = [&](int a, int b) {
        if (a == b)
            return;
        A.row(a).swap(A.row(b));
        A.col(a).swap(A.col(b));
        std::swap(perm(a), perm(b));
    };
    int j = 0;
    bool phase_one = true;
    while (j < n && phase_one) {
        const auto d = A.diagonal().tail(n - j);
        int rel;
        const double dmax = d.maxCoeff(&rel);
        if (dmax < taugam || d.minCoeff() < -mu * dmax) {
            phase_one = false;
            break;
        }
        swap_sym(j, j + rel);
        if (j < n - 1) {
            const auto dd = A.diagonal().tail(n - j - 1);
            const auto cc = A.col(j).tail(n - j - 1);
            if ((dd.array() - cc.array().square() / A(j, j)).minCoeff() <
                -mu * gamma) {
                phase_one = false;
                break;
            }
        }
        A(j, j) = std::sqrt(A(j, j));
        if (j < n - 1) {
            A.col(j).tail(n - j - 1) /= A(j, j);
            A.bottomRightCorner(n - j - 1, n - j - 1).noalias() -=
                A.col(j).tail(n - j - 1) * A.col(j).tail(n - j - 1).transpose();
        }
        ++j;
    }
    if (phase_one)
        return E;  // fully factored, no perturbation needed
    double delta = 0.0;
    if (j == n - 1) {
        const double d =
            std::max(0.0, -A(j, j) + std::max(taugam,
                                              tau * -A(j, j) / (1 - tau)));
        E(perm(j)) = d;
        return E;
    }
    while (j < n - 2) {
        const auto sub = A.bottomRightCorner(n - j, n - j);
        int rel = 0;
        (sub.diagonal() -
         (sub.cwiseAbs().rowwise().sum() - sub.diagonal().cwiseAbs()))
            .maxCoeff(&rel);
        swap_sym(j, j + rel);
        const double normj = A.col(j).tail(n - j - 1).cwiseAbs().sum();
        const double d =
            std::max({0.0, delta, -A(j, j) + std::max(normj, taugam)});
        if (d > 0) {
            A(j, j) += d;
            E(perm(j)) = d;
            delta = d;
        }
        A(j, j) = std::sqrt(A(j, j));
        A.col(j).tail(n - j - 1) /= A(j, j);
        A.bottomRightCorner(n - j - 1, n - j - 1).noalias() -=
            A.col(j).tail(n - j - 1) * A.col(j).tail(n - j - 1).transpose();
        ++j;
    }
    Eigen::Matrix2d B = A.bottomRightCorner(2, 2);
    B(0, 1) = B(1, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(B);
    const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
    const double d = std::max(
        {0.0, delta, -lo + std::max(tau * (hi - lo) / (1 - tau), taugam)});
    if (d > 0) {
        E(perm(n - 2)) = d;
        E(perm(n - 1)) = d;
    }
    return E;
}

}  // namespace

RepairResult psd_repair(Eigen::MatrixXd M, const RepairOptions& opts) {
    if (M.rows() != M.cols())
        throw NotSymmetric("psd_repair requires a square matrix");
    if (!M.isApprox(M.transpose(), 1e-12))
        throw NotSymmetric("psd_repair requires a symmetric matrix");
    RepairResult result;
    if (cholesky_ok(M)) {
        result.matrix = std::move(M);
        return result;
    }
    const int n = static_cast<int>(M.rows());
    const double eps_floor = opts.eps_scale * M.cwiseAbs().maxCoeff();
    result.repaired = true;
    switch (opts.strategy) {
        case RepairOptions::Strategy::TwoPhase: {
            const Eigen::VectorXd E = two_phase_delta(M);
            M.diagonal() += E;
            result.e_norm = E.maxCoeff();
            break;
        }
        case RepairOptions::Strategy::MinimalShift: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
                M, Eigen::EigenvaluesOnly);
            const double lmin = es.eigenvalues()(0);
            const double shift = eps_floor - std::min(lmin, 0.0);
            M.diagonal().array() += shift;
            result.e_norm = shift;
            break;
        }
        case RepairOptions::Strategy::SpectralFloor: {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
            Eigen::VectorXd ev = es.eigenvalues();
            const Eigen::VectorXd floored = ev.cwiseMax(eps_floor);
            M = es.eigenvectors() * floored.asDiagonal() *
                es.eigenvectors().transpose();
            result.e_norm = (floored - ev).maxCoeff();
            break;
        }
    }
    // Rounding can leave the shifted matrix right at the edge; nudge until
    // the factorization is clean.
    for (int tries = 0; tries < 3 && !cholesky_ok(M); ++tries) {
        const double bump = std::max(eps_floor, 1e-14) * (1 << tries) * n;
        M.diagonal().array() += bump;
        result.e_norm += bump;
    }
    result.matrix = std::move(M);
    return result;
}

Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& M) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw SingularFactor("Cholesky factorization failed; repair first");
    const int n = static_cast<int>(M.rows());
    return llt.matrixL().solve(Eigen::MatrixXd::Identity(n, n));
}

WhitenResult whiten_full(const Grid& grid, const DecorrelateOptions& opts) {
    const int n = static_cast<int>(grid.rows());
    const int m = static_cast<int>(grid.cols());
    const AutocovTable table = estimate_autocov_table(grid);
    Eigen::MatrixXd S =
        assemble_full(table, n, m, opts.mixed, opts.size_guard);
    RepairResult rep = psd_repair(std::move(S), opts.repair);
    Eigen::LLT<Eigen::MatrixXd> llt(rep.matrix);
    if (llt.info() != Eigen::Success)
        throw SingularFactor("repaired covariance failed to factor");
    Eigen::VectorXd centered = vec(grid).array() - grid.mean();
    Eigen::VectorXd y = llt.matrixL().solve(centered);
    WhitenResult out;
    out.grid = unvec(y, n, m);
    out.repaired = rep.repaired;
    out.repair_norm = rep.e_norm;
    return out;
}

WhitenResult whiten_separable(const Grid& grid,
                              const DecorrelateOptions& opts) {
    SeparableModel model = assemble_separable(grid);
    RepairResult r1 = psd_repair(std::move(model.sigma1), opts.repair);
    RepairResult r2 = psd_repair(std::move(model.sigma2), opts.repair);
    const Eigen::MatrixXd W1 = inverse_sqrt(r1.matrix);
    const Eigen::MatrixXd W2 = inverse_sqrt(r2.matrix);
    WhitenResult out;
    out.grid = W2 * (grid.array() - grid.mean()).matrix() * W1.transpose();
    out.repaired = r1.repaired || r2.repaired;
    out.repair_norm = std::max(r1.e_norm, r2.e_norm);
    return out;
}

WhitenResult whiten(const Grid& grid, const DecorrelateOptions& opts) {
    switch (opts.path) {
        case DecorrelatePath::None: {
            WhitenResult out;
            out.grid = grid;
            return out;
        }
        case DecorrelatePath::Full:
            return whiten_full(grid, opts);
        case DecorrelatePath::Separable:
            return whiten_separable(grid, opts);
    }
    throw UnknownKind("unrecognized decorrelation path");
}

}  // namespace fieldscan
