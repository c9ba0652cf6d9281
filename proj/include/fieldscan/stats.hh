#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fieldscan/decorrelate.hh"
#include "fieldscan/grid.hh"
#include "fieldscan/partition.hh"

namespace fieldscan {

enum class TestKind { GMD, Var };

const char* test_name(TestKind k);
TestKind test_from_name(const std::string& name);

// Variance of the limiting law of the unstandardized GMD statistic,
// 4/3 + (8/pi)(sqrt(3) - 2).
double gmd_limit_variance();

struct TestResult {
    TestKind kind = TestKind::Var;
    double raw = 0.0;        // U for GMD, the pre-standardized sum for Var
    double statistic = 0.0;  // standardized, asymptotically N(0,1)
    double p_value = 1.0;
    BlockPartition partition;
    double sigma2_hat = 0.0;
    bool decorrelated = false;
    bool repaired = false;  // whether whitening needed a covariance repair
};

// Gini mean difference of the block means: average absolute difference over
// all unordered pairs, computed through the order-statistics identity
// U = 2/(B(B-1)) * sum_i (2i - B - 1) mu_(i) in O(B log B).
double gmd_U(const Eigen::MatrixXd& means);

TestResult gmd_statistic(const Grid& grid, const BlockPartition& p,
                         double sigma2_hat);

TestResult var_statistic(const Grid& grid, const BlockPartition& p,
                         double sigma2_hat);

// One-sided upper-tail p-value 1 - Phi(statistic).
double p_value(double statistic);

// Average squared deviation of the block means from the overall mean;
// estimates the integrated squared centered mean surface.
double consistency_T(const Grid& grid, const BlockPartition& p);

struct HolmResult {
    std::vector<bool> reject;      // in the original order
    std::vector<double> adjusted;  // monotone step-down adjusted p-values
};

HolmResult holm_adjust(const std::vector<double>& p_values, double alpha);

// End-to-end driver: optional whitening, partition construction, variance
// estimation, statistic dispatch.
TestResult run_test(const Grid& grid, TestKind kind, double s_target = 0.6,
                    const std::optional<DecorrelateOptions>& decor = {});

}  // namespace fieldscan
