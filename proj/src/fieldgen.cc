#include "fieldscan/fieldgen.hh"

#include <cmath>

namespace fieldscan {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next() {
    state_ += kGamma;
    return mix64(state_);
}

double Rng::uniform() {
    // 53 random bits mapped to the open interval (0, 1).
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * M_PI * u2);
}

double Rng::student_t3() {
    const double z0 = normal();
    const double s = normal(), t = normal(), u = normal();
    return z0 / std::sqrt((s * s + t * t + u * u) / 3.0);
}

double Rng::chisq2_centered() {
    return -2.0 * std::log(uniform()) - 2.0;
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (std::uint64_t k : key)
        h = mix64(h + kGamma + mix64(k));
    return h;
}

const char* noise_name(NoiseDist d) {
    switch (d) {
        case NoiseDist::StdNormal: return "normal";
        case NoiseDist::StudentT3: return "t3";
        case NoiseDist::ChiSq2Centered: return "chisq2";
        case NoiseDist::Degenerate: return "degenerate";
    }
    throw UnknownKind("unrecognized noise distribution");
}

NoiseDist noise_from_name(const std::string& name) {
    if (name == "normal" || name == "gaussian") return NoiseDist::StdNormal;
    if (name == "t3") return NoiseDist::StudentT3;
    if (name == "chisq2") return NoiseDist::ChiSq2Centered;
    if (name == "degenerate") return NoiseDist::Degenerate;
    throw UnknownKind("unrecognized noise distribution: " + name);
}

const char* dep_name(DepKind k) {
    switch (k) {
        case DepKind::IID: return "iid";
        case DepKind::SMA: return "sma";
        case DepKind::SARApprox: return "sar";
    }
    throw UnknownKind("unrecognized dependence kind");
}

Eigen::MatrixXd sma_weights(int q, double rho) {
    if (std::abs(rho) >= 1.0)
        throw InvalidRho("sma_weights requires |rho| < 1");
    const int w = 2 * q + 1;
    Eigen::MatrixXd theta(w, w);
    for (int k = -q; k <= q; ++k)
        for (int l = -q; l <= q; ++l)
            theta(k + q, l + q) =
                std::pow(rho, std::abs(k) + std::abs(l));
    if (rho == 0.0) {
        // 0^0 := 1: identity stencil.
        theta.setZero();
        theta(q, q) = 1.0;
    }
    return theta;
}

Eigen::MatrixXd sar_approx_weights(int q, double rho) {
    if (rho <= 0.0 || rho >= 1.0)
        throw InvalidRho("sar_approx_weights requires rho in (0, 1)");
    if (q < 40)
        throw InputError("sar_approx_weights requires q >= 40");
    const int w = 2 * q + 1;
    Eigen::MatrixXd theta(w, w);
    for (int i = -q; i <= q; ++i)
        for (int j = -q; j <= q; ++j)
            theta(i + q, j + q) =
                std::pow(rho, std::sqrt(double(i) * i + double(j) * j));
    theta /= std::sqrt(theta.array().square().sum());
    return theta;
}

namespace {

Grid draw_grid(int n, int m, NoiseDist dist, Rng& rng) {
    Grid g(n, m);
    // Column-major fill order fixes the draw sequence.
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) {
            switch (dist) {
                case NoiseDist::StdNormal: g(i, j) = rng.normal(); break;
                case NoiseDist::StudentT3: g(i, j) = rng.student_t3(); break;
                case NoiseDist::ChiSq2Centered:
                    g(i, j) = rng.chisq2_centered();
                    break;
                case NoiseDist::Degenerate: g(i, j) = 0.0; break;
            }
        }
    return g;
}

}  // namespace

Grid gen_iid(int n, int m, const NoiseSpec& noise) {
    if (n < 1 || m < 1)
        throw InputError("gen_iid requires positive dimensions");
    Rng rng(noise.seed);
    return draw_grid(n, m, noise.dist, rng);
}

Grid gen_dependent(int n, int m, const DependenceSpec& dep,
                   const NoiseSpec& noise) {
    if (dep.kind == DepKind::IID || dep.q == 0)
        return gen_iid(n, m, noise);
    const int q = dep.q;
    const Eigen::MatrixXd theta = dep.kind == DepKind::SMA
                                      ? sma_weights(q, dep.rho)
                                      : sar_approx_weights(q, dep.rho);
    Rng rng(noise.seed);
    const Grid eps = draw_grid(n + 2 * q, m + 2 * q, noise.dist, rng);
    Grid out(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i)
            out(i, j) =
                (eps.block(i, j, 2 * q + 1, 2 * q + 1).array() *
                 theta.array())
                    .sum();
    return out;
}

Grid gen_field(int n, int m, const MeanSurface& surface,
               const DependenceSpec& dep, const NoiseSpec& noise,
               const BlockPartition& p) {
    return eval_mean_surface(surface, n, m, p) +
           gen_dependent(n, m, dep, noise);
}

}  // namespace fieldscan
