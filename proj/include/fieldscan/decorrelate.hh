#pragma once

#include <vector>

#include "fieldscan/grid.hh"

namespace fieldscan {

// Estimation bandwidth floor(0.9 * k^(1/3)).
int bandwidth(int k);

// Banded empirical autocovariance at lag (h1, h2), centered at the overall
// mean, divisor N (the biased form). Lags are canonicalized through the
// point symmetry gamma(-h1, -h2) = gamma(h1, h2); mixed-sign lags
// (h1 > 0, h2 < 0) use the analogous shifted sum.
double empirical_autocov(const Grid& grid, int h1, int h2);

// All canonical lags within the per-dimension bandwidths, including the
// mixed-sign quadrant. Lags outside the band are implicitly zero.
class AutocovTable {
  public:
    AutocovTable(int b1, int b2);

    int b1() const { return b1_; }
    int b2() const { return b2_; }

    double at(int h1, int h2) const;  // any signs, zero outside the band
    void set(int h1, int h2, double value);  // canonical lags only

  private:
    int b1_, b2_;
    Eigen::MatrixXd pos_;  // h1 in [0, b1], h2 in [0, b2]
    Eigen::MatrixXd neg_;  // h1 in [1, b1], h2 in [-b2, -1]
};

AutocovTable estimate_autocov_table(const Grid& grid);

// How the assembled full matrix treats the estimated mixed-sign lags.
// Estimate uses them as estimated, giving the most literal stationary
// model; Zero drops them (only lags with h1, h2 >= 0 carry weight);
// Reflect imposes axial symmetry gamma(h1, -h2) = gamma(h1, h2).
enum class MixedLagPolicy { Zero, Estimate, Reflect };

inline constexpr MixedLagPolicy kDefaultMixedLagPolicy = MixedLagPolicy::Estimate;

// Dense N x N covariance of vec(grid) under column-major stacking:
// Sigma[(i,j),(i',j')] = gamma(i'-i, j'-j), zero outside the band.
// Guarded against accidental huge allocations.
Eigen::MatrixXd assemble_full(const AutocovTable& table, int n, int m,
                              MixedLagPolicy mixed = kDefaultMixedLagPolicy,
                              int size_guard = 10000);

struct SeparableModel {
    Eigen::MatrixXd sigma1;  // m x m horizontal covariance
    Eigen::MatrixXd sigma2;  // n x n vertical correlation, unit diagonal
};

// Banded separable factors from the directional lags: sigma1 from
// gamma(0, .), sigma2 from gamma(., 0) scaled by gamma(0,0) so that
// diag(sigma1 (x) sigma2) = gamma(0,0).
SeparableModel assemble_separable(const Grid& grid);

struct RepairOptions {
    enum class Strategy {
        // Two-phase factorization repair: pivots that factor cleanly are
        // left untouched, the remainder receives nondecreasing diagonal
        // boosts sized by Gershgorin bounds. Perturbs nearly-PSD matrices
        // barely and badly indefinite ones strongly.
        TwoPhase,
        // Uniform diagonal shift lifting the smallest eigenvalue to the
        // floor; the minimal perturbation of this shape.
        MinimalShift,
        // Eigendecompose, lift eigenvalues below the floor, reconstitute.
        SpectralFloor,
    };
    Strategy strategy = Strategy::TwoPhase;
    double eps_scale = 1e-8;  // floor = eps_scale * max-norm of the input
};

struct RepairResult {
    Eigen::MatrixXd matrix;
    bool repaired = false;
    double e_norm = 0.0;  // max-norm of the applied perturbation
};

// Returns the input unchanged when it already factors; otherwise returns
// M + E with E diagonal and nonnegative, chosen by the strategy, such that
// the result admits a Cholesky factorization.
RepairResult psd_repair(Eigen::MatrixXd M, const RepairOptions& opts = {});

// W = L^(-1) for the Cholesky factor M = L L^T, computed by triangular
// back-substitution. Throws SingularFactor when the factorization breaks
// down (call psd_repair first).
Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& M);

enum class DecorrelatePath { None, Full, Separable };

struct DecorrelateOptions {
    DecorrelatePath path = DecorrelatePath::Full;
    MixedLagPolicy mixed = kDefaultMixedLagPolicy;
    RepairOptions repair;
    int size_guard = 10000;
};

struct WhitenResult {
    Grid grid;
    bool repaired = false;
    double repair_norm = 0.0;
};

// Full path: y = W (vec(X) - mean), reshaped column-wise.
WhitenResult whiten_full(const Grid& grid, const DecorrelateOptions& opts = {});

// Separable path: Y = W2 (X - mean) W1^T, which equals the full path on an
// exactly separable model without ever forming the N x N matrix.
WhitenResult whiten_separable(const Grid& grid,
                              const DecorrelateOptions& opts = {});

WhitenResult whiten(const Grid& grid, const DecorrelateOptions& opts);

}  // namespace fieldscan
