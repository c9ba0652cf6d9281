#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>

#include "fieldscan/grid.hh"
#include "fieldscan/partition.hh"

namespace fieldscan {

// Counter-free splittable generator: a splitmix64 stream seeded by hashing
// an arbitrary key tuple. Streams for distinct keys are independent for all
// practical purposes, and a given key always yields the same draw sequence,
// no matter which thread consumes it. That is the whole reproducibility
// story: derive one stream per replication, never share streams.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    double uniform();  // open interval (0, 1)
    double normal();   // Box-Muller, two uniforms per draw, no cached spare
    double student_t3();
    double chisq2_centered();

  private:
    std::uint64_t state_;
};

// Hash-combines a key tuple into a stream seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> key);

enum class NoiseDist {
    StdNormal,       // mean 0, variance 1
    StudentT3,       // raw t with 3 df, variance 3
    ChiSq2Centered,  // chi-squared(2) minus 2, variance 4
    Degenerate,      // all zeros, test hook
};

struct NoiseSpec {
    NoiseDist dist = NoiseDist::StdNormal;
    std::uint64_t seed = 0;
};

enum class DepKind { IID, SMA, SARApprox };

struct DependenceSpec {
    DepKind kind = DepKind::IID;
    int q = 0;
    double rho = 0.0;
};

const char* noise_name(NoiseDist d);
NoiseDist noise_from_name(const std::string& name);
const char* dep_name(DepKind k);

// Weight stencil of the symmetric moving-average field of order q, indexed
// by offsets k, l in {-q..q}: theta(k, l) = rho^(|k| + |l|), center weight 1.
Eigen::MatrixXd sma_weights(int q, double rho);

// Radially decaying stencil theta(i, j) = rho^sqrt(i^2 + j^2), normalized to
// unit sum of squares. Requires q >= 40.
Eigen::MatrixXd sar_approx_weights(int q, double rho);

// n*m independent draws from the chosen distribution, filled column-major.
Grid gen_iid(int n, int m, const NoiseSpec& noise);

// Moving-average field: an enlarged (n+2q) x (m+2q) innovation field is drawn
// and convolved with the stencil, so every returned cell sees a full stencil
// and the output is exactly stationary. IID dependence falls through to
// gen_iid with the same seed discipline.
Grid gen_dependent(int n, int m, const DependenceSpec& dep,
                   const NoiseSpec& noise);

// Mean surface plus noise.
Grid gen_field(int n, int m, const MeanSurface& surface,
               const DependenceSpec& dep, const NoiseSpec& noise,
               const BlockPartition& p);

}  // namespace fieldscan
